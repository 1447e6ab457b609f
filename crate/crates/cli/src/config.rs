//! Flat `key = value` run configuration. `#` starts a comment; keys are
//! case-insensitive and `-` is accepted for `_`.

use std::path::{Path, PathBuf};

use ssfem::ProblemConfig;

use crate::CliError;

/// Everything a solver subcommand needs: the problem plus output locations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub out: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub cijk_out: Option<PathBuf>,
}

fn value<T: std::str::FromStr>(origin: &Path, line: usize, key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| CliError::Config(format!("{}:{line}: bad value `{raw}` for `{key}`: {e}", origin.display())))
}

impl RunConfig {
    /// Applies one setting; `origin` and `line` only feed error messages.
    pub fn set(&mut self, key: &str, raw: &str, origin: &Path, line: usize) -> Result<(), CliError> {
        let p = &mut self.problem;
        let key_norm = key.trim().to_ascii_lowercase().replace('-', "_");
        let raw = raw.trim();
        match key_norm.as_str() {
            "mesh" => p.mesh = Some(PathBuf::from(raw)),
            "nx" => p.nx = value(origin, line, key, raw)?,
            "ny" => p.ny = value(origin, line, key, raw)?,
            "l" | "dim" => p.dim = value(origin, line, key, raw)?,
            "p_u" => p.p_u = value(origin, line, key, raw)?,
            "p_a" => p.p_a = Some(value(origin, line, key, raw)?),
            "sigma" => p.sigma = value(origin, line, key, raw)?,
            "b" | "corr_length" => p.corr_length = value(origin, line, key, raw)?,
            "a" | "half_width" => p.half_width = value(origin, line, key, raw)?,
            "g0" => p.g0 = value(origin, line, key, raw)?,
            "f" => p.f = value(origin, line, key, raw)?,
            "tol" => p.tol = value(origin, line, key, raw)?,
            "max_iter" => p.max_iter = Some(value(origin, line, key, raw)?),
            "level" => p.level = value(origin, line, key, raw)?,
            "out" => self.out = Some(PathBuf::from(raw)),
            "vtk" => self.vtk = Some(PathBuf::from(raw)),
            "cijk_out" => self.cijk_out = Some(PathBuf::from(raw)),
            _ => {
                return Err(CliError::Config(format!(
                    "{}:{line}: unknown key `{key}`",
                    origin.display()
                )))
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{}:{}: expected `key = value`, got `{line}`", origin.display(), idx + 1))
            })?;
            cfg.set(key, raw, origin, idx + 1)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }
}

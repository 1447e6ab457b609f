//! `ssfem` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
//! 4 I/O error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use ssfem::field::{load_table, write_table};
use ssfem::kle::eigen_1d;
use ssfem::{
    compare_fields, eigen_2d, export_vtk, field_stats, smolyak, Error, FieldRole, PceBasis, StochasticField, TriMesh,
};

use config::RunConfig;

/// `println!` that tolerates a closed stdout (e.g. piping into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Solver(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 4,
            CliError::Solver(e) => solver_code(e),
        }
    }
}

fn solver_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged { .. } => 3,
        Error::SampleFailed { source, .. } => solver_code(source),
        Error::Io { .. } | Error::Parse { .. } => 4,
        _ => 2,
    }
}

#[derive(Parser, Debug)]
#[command(name = "ssfem", version, about = "Spectral stochastic FEM for lognormal diffusion")]
struct Cli {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct ProblemArgs {
    /// Mesh file (text format); a structured nx x ny mesh otherwise.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Number of KL terms / chaos dimension.
    #[arg(long = "L")]
    dim: Option<usize>,
    /// Solution chaos order.
    #[arg(long = "p-u")]
    p_u: Option<usize>,
    /// Input chaos order (default 2 p_u).
    #[arg(long = "p-a")]
    p_a: Option<usize>,
    /// Standard deviation of the Gaussian field.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "corr-length")]
    corr_length: Option<f64>,
    /// Mean of the Gaussian field.
    #[arg(long)]
    g0: Option<f64>,
    /// Constant source term.
    #[arg(long)]
    f: Option<f64>,
    /// Relative residual target of the coupled solve.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Legacy VTK output path.
    #[arg(long)]
    vtk: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One- and two-dimensional KL eigenvalues of the exponential kernel.
    KleReport {
        #[arg(long, default_value_t = 0.5)]
        half_width: f64,
        #[arg(long = "corr-length", default_value_t = 1.0)]
        corr_length: f64,
        /// Process variance.
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
        #[arg(long, default_value_t = 7)]
        n: usize,
    },
    /// Smolyak sparse-grid nodes and weights.
    GridReport {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        level: usize,
    },
    /// Deterministic solve with the median coefficient exp(g0).
    SolveDet {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Coupled stochastic Galerkin solve.
    SolveIntrusive {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Text dump of the C_ijk entries.
        #[arg(long = "cijk-out")]
        cijk_out: Option<PathBuf>,
    },
    /// Non-intrusive spectral projection on a Smolyak grid.
    SolveNisp {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        level: Option<usize>,
        /// Also run every dimension 2..=L and level 2..=level and report the changes.
        #[arg(long)]
        sweep: bool,
    },
    /// Compare two solution CSV files written with the same basis.
    Compare {
        reference: PathBuf,
        other: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Mean and standard deviation of a solution CSV file.
    Stats {
        input: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
    },
}

fn run_config(config: Option<&Path>, args: &ProblemArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let p = &mut cfg.problem;
    if let Some(m) = &args.mesh {
        p.mesh = Some(m.clone());
    }
    macro_rules! overlay {
        ($($field:ident),*) => { $( if let Some(v) = args.$field { p.$field = v; } )* };
    }
    overlay!(nx, ny, dim, p_u, sigma, corr_length, g0, f, tol);
    if args.p_a.is_some() {
        p.p_a = args.p_a;
    }
    if args.max_iter.is_some() {
        p.max_iter = args.max_iter;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(v) = &args.vtk {
        cfg.vtk = Some(v.clone());
    }
    cfg.problem.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn write_field(mesh: &TriMesh, field: &StochasticField, cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(path) = &cfg.out {
        field.save_csv(mesh.nodes(), path)?;
        info!("wrote {}", path.display());
    }
    if let Some(path) = &cfg.vtk {
        let stats = field_stats(field);
        let names: Vec<String> = (0..field.num_terms().min(4)).map(|j| format!("u{j}")).collect();
        let mut fields: Vec<(&str, &[f64])> = vec![("mean", &stats.mean), ("std", &stats.std)];
        fields.extend(names.iter().zip(field.coeffs()).skip(1).map(|(n, c)| (n.as_str(), c.as_slice())));
        export_vtk(mesh, &fields, path)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn summarize(label: &str, field: &StochasticField) {
    let stats = field_stats(field);
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
    say!(
        "{label}: {} nodes, {} chaos terms, max mean {:.6e}, max std {:.6e}",
        field.num_nodes(),
        field.num_terms(),
        max(&stats.mean),
        max(&stats.std)
    );
}

fn load_solution(path: &Path, basis: PceBasis) -> Result<(Vec<[f64; 2]>, StochasticField), CliError> {
    let table = load_table(path)?;
    if table.coeffs.len() != basis.len() {
        return Err(CliError::Config(format!(
            "{} holds {} coefficient columns but L={}, p_u={} needs {}",
            path.display(),
            table.coeffs.len(),
            basis.dim(),
            basis.order(),
            basis.len()
        )));
    }
    let nodes = table.nodes.clone();
    Ok((nodes, StochasticField::from_table(basis, table, FieldRole::Solution)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::KleReport {
            half_width,
            corr_length,
            variance,
            n,
        } => {
            let pairs = eigen_1d(half_width, corr_length, variance, n)?;
            say!("{:>3} {:>10} {:>10}", "i", "omega", "lambda");
            for (i, p) in pairs.iter().enumerate() {
                say!("{:>3} {:>10.4} {:>10.4}", i + 1, p.omega, p.lambda);
            }
            let kle = eigen_2d(half_width, corr_length, variance, n)?;
            say!();
            say!("{:>3} {:>4} {:>4} {:>10}", "n", "i", "j", "lambda");
            for (k, m) in kle.modes.iter().enumerate() {
                say!("{:>3} {:>4} {:>4} {:>10.4}", k + 1, m.ix, m.iy, m.lambda);
            }
        }
        Command::GridReport { dim, level } => {
            let grid = smolyak(dim, level)?;
            say!("# d={dim} l={level}: {} nodes", grid.len());
            for (p, w) in grid.points.iter().zip(&grid.weights) {
                let coords: Vec<String> = p.iter().map(|x| format!("{x:8.4}")).collect();
                say!("{{{}}} {w:8.4}", coords.join(", "));
            }
        }
        Command::SolveDet { problem } => {
            let cfg = run_config(config, &problem)?;
            let mesh = cfg.problem.build_mesh()?;
            let u = cfg.problem.solve_median(&mesh)?;
            say!(
                "deterministic: {} nodes, max u {:.6e}",
                mesh.num_nodes(),
                u.iter().fold(0.0f64, |m, x| m.max(*x))
            );
            if let Some(path) = &cfg.out {
                let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                write_table(mesh.nodes(), std::slice::from_ref(&u), std::io::BufWriter::new(file))?;
            }
            if let Some(path) = &cfg.vtk {
                export_vtk(&mesh, &[("u", &u)], path)?;
            }
        }
        Command::SolveIntrusive { problem, cijk_out } => {
            let mut cfg = run_config(config, &problem)?;
            if cijk_out.is_some() {
                cfg.cijk_out = cijk_out;
            }
            let mesh = cfg.problem.build_mesh()?;
            let start = Instant::now();
            let sol = cfg.problem.run_intrusive(&mesh)?;
            say!(
                "intrusive: {} CG iterations, relative residual {:.3e}, {} C_ijk entries, {:.2?}",
                sol.report.iterations,
                sol.report.rel_residual,
                sol.cijk_nnz,
                start.elapsed()
            );
            summarize("intrusive", &sol.field);
            if let Some(path) = &cfg.cijk_out {
                let basis_a = cfg.problem.input_basis()?;
                ssfem::build_cijk(&basis_a, sol.field.basis())?.save_text(path)?;
            }
            write_field(&mesh, &sol.field, &cfg)?;
        }
        Command::SolveNisp { problem, level, sweep } => {
            let mut cfg = run_config(config, &problem)?;
            if let Some(l) = level {
                cfg.problem.level = l;
            }
            cfg.problem.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let mesh = cfg.problem.build_mesh()?;
            if sweep {
                for dim in 2..=cfg.problem.dim {
                    let mut prev: Option<Vec<f64>> = None;
                    for l in 2..=cfg.problem.level {
                        let p = ssfem::ProblemConfig {
                            dim,
                            level: l,
                            ..cfg.problem.clone()
                        };
                        let sol = p.run_nisp(&mesh)?;
                        let flat = sol.field.coeffs().concat();
                        let change = prev.as_ref().map(|q| {
                            flat.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                        });
                        say!(
                            "sweep d={dim} l={l}: {} samples, change {}",
                            sol.samples,
                            change.map_or("-".to_string(), |c| format!("{c:.3e}"))
                        );
                        prev = Some(flat);
                    }
                }
            }
            let start = Instant::now();
            let sol = cfg.problem.run_nisp(&mesh)?;
            say!(
                "nisp: {} samples (d={}, l={}), at most {} CG iterations per sample, {:.2?}",
                sol.samples,
                cfg.problem.dim,
                cfg.problem.level,
                sol.max_iterations,
                start.elapsed()
            );
            summarize("nisp", &sol.field);
            write_field(&mesh, &sol.field, &cfg)?;
        }
        Command::Compare {
            reference,
            other,
            problem,
        } => {
            let cfg = run_config(config, &problem)?;
            let basis = cfg.problem.solution_basis()?;
            let (nodes_a, a) = load_solution(&reference, basis.clone())?;
            let (nodes_b, b) = load_solution(&other, basis)?;
            if nodes_a != nodes_b {
                return Err(CliError::Config("the two files use different node coordinates".into()));
            }
            let report = compare_fields(&a, &b)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            say!("{json}");
            if let Some(path) = &cfg.out {
                std::fs::write(path, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Stats { input, problem } => {
            let cfg = run_config(config, &problem)?;
            let (nodes, field) = load_solution(&input, cfg.problem.solution_basis()?)?;
            let stats = field_stats(&field);
            summarize("stats", &field);
            if let Some(path) = &cfg.out {
                let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                write_table(&nodes, &[stats.mean.clone(), stats.std.clone()], std::io::BufWriter::new(file))?;
            }
            if let Some(path) = &cfg.vtk {
                let mesh = cfg.problem.build_mesh()?;
                if mesh.num_nodes() != nodes.len() {
                    return Err(CliError::Config(format!(
                        "mesh has {} nodes but {} holds {}",
                        mesh.num_nodes(),
                        input.display(),
                        nodes.len()
                    )));
                }
                export_vtk(&mesh, &[("mean", &stats.mean), ("std", &stats.std)], path)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

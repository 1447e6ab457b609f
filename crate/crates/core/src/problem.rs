//! Problem setup shared by the solvers: mesh, KL-truncated Gaussian field,
//! lognormal input expansion, and the two stochastic solution routes.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{assemble_load, solve_deterministic};
use crate::field::StochasticField;
use crate::intrusive::{intrusive_settings, solve_intrusive, IntrusiveSolution};
use crate::kle::{eigen_2d, GaussianModes, KlExpansion2D};
use crate::linalg::CgSettings;
use crate::lognormal::lognormal_pce;
use crate::mesh::{structured_mesh, TriMesh};
use crate::nisp::{nisp_solve, NispSolution};
use crate::pce::{build_basis, PceBasis};
use crate::sparsegrid::{smolyak, SparseGrid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    /// Mesh file; a structured `nx x ny` mesh is used when absent.
    pub mesh: Option<PathBuf>,
    pub nx: usize,
    pub ny: usize,
    /// Number of KL terms, which is also the chaos dimension `L`.
    pub dim: usize,
    pub p_u: usize,
    /// Input chaos order; `2 p_u` when absent.
    pub p_a: Option<usize>,
    /// Standard deviation of the Gaussian field.
    pub sigma: f64,
    pub corr_length: f64,
    /// Physical half-width `a`: the unit square maps onto `[-a, a]^2`.
    pub half_width: f64,
    /// Constant mean `g_0` of the Gaussian field.
    pub g0: f64,
    pub f: f64,
    /// Smolyak level for NISP.
    pub level: usize,
    /// Relative residual target of the coupled intrusive solve.
    pub tol: f64,
    /// CG iteration cap; scaled with the system size when absent.
    pub max_iter: Option<usize>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            mesh: None,
            nx: 24,
            ny: 24,
            dim: 3,
            p_u: 3,
            p_a: None,
            sigma: 0.3,
            corr_length: 1.0,
            half_width: 0.5,
            g0: 0.0,
            f: 1.0,
            level: 3,
            tol: crate::intrusive::INTRUSIVE_TOL,
            max_iter: None,
        }
    }
}

impl ProblemConfig {
    pub fn input_order(&self) -> usize {
        self.p_a.unwrap_or(2 * self.p_u)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.dim == 0 {
            return bad("L must be at least 1".into());
        }
        if self.level == 0 {
            return bad("sparse-grid level must be at least 1".into());
        }
        if self.mesh.is_none() && (self.nx == 0 || self.ny == 0) {
            return bad(format!("structured mesh needs nx, ny >= 1 (got {}x{})", self.nx, self.ny));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and non-negative, got {}", self.sigma));
        }
        if !(self.corr_length > 0.0 && self.corr_length.is_finite()) {
            return bad(format!("correlation length must be positive, got {}", self.corr_length));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return bad(format!("half-width must be positive, got {}", self.half_width));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tolerance must lie in (0, 1), got {}", self.tol));
        }
        if !self.f.is_finite() || !self.g0.is_finite() {
            return bad("source and mean log-coefficient must be finite".into());
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<TriMesh> {
        match &self.mesh {
            Some(path) => TriMesh::load(path),
            None => structured_mesh(self.nx, self.ny),
        }
    }

    pub fn kle(&self) -> Result<KlExpansion2D> {
        eigen_2d(self.half_width, self.corr_length, self.sigma * self.sigma, self.dim)
    }

    pub fn gaussian_modes(&self, mesh: &TriMesh) -> Result<GaussianModes> {
        self.kle()?.gaussian_modes(mesh.nodes(), self.g0, self.dim)
    }

    pub fn input_basis(&self) -> Result<PceBasis> {
        build_basis(self.dim, self.input_order())
    }

    pub fn solution_basis(&self) -> Result<PceBasis> {
        build_basis(self.dim, self.p_u)
    }

    pub fn grid(&self) -> Result<SparseGrid> {
        smolyak(self.dim, self.level)
    }

    pub fn input_field(&self, mesh: &TriMesh) -> Result<StochasticField> {
        lognormal_pce(&self.gaussian_modes(mesh)?, &self.input_basis()?)
    }

    /// Deterministic solve at the median coefficient `exp(g_0)`.
    pub fn solve_median(&self, mesh: &TriMesh) -> Result<Vec<f64>> {
        solve_deterministic(mesh, &vec![self.g0.exp(); mesh.num_nodes()], self.f)
    }

    pub fn run_intrusive(&self, mesh: &TriMesh) -> Result<IntrusiveSolution> {
        self.validate()?;
        let l = self.input_field(mesh)?;
        let basis_u = self.solution_basis()?;
        let dim = mesh.num_nodes() * basis_u.len();
        let settings = CgSettings {
            rel_tol: self.tol,
            max_iter: self.max_iter.unwrap_or(intrusive_settings(dim).max_iter),
        };
        solve_intrusive(mesh, &l, &assemble_load(mesh, self.f), &basis_u, settings)
    }

    pub fn run_nisp(&self, mesh: &TriMesh) -> Result<NispSolution> {
        self.validate()?;
        let modes = self.gaussian_modes(mesh)?;
        nisp_solve(mesh, &modes, &self.solution_basis()?, &self.grid()?, self.f)
    }
}

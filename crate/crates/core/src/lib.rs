//! Spectral stochastic finite elements for 2D diffusion with a lognormal random
//! coefficient.
//!
//! The coefficient `exp(g)` is built from a Karhunen-Loeve truncated Gaussian field
//! and expanded in Hermite polynomial chaos. The solution chaos coefficients are
//! computed either from the coupled Galerkin system ([`intrusive`]) or by
//! projecting independent deterministic solves on a Smolyak grid ([`nisp`]).
//!
//! ```
//! use ssfem::{ProblemConfig, field_stats};
//!
//! let cfg = ProblemConfig { nx: 4, ny: 4, dim: 2, p_u: 1, ..Default::default() };
//! let mesh = cfg.build_mesh().unwrap();
//! let sol = cfg.run_intrusive(&mesh).unwrap();
//! let stats = field_stats(&sol.field);
//! assert!(stats.std.iter().all(|&s| s >= 0.0));
//! ```

// `!(x > 0.0)` is used on purpose so NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod field;
pub mod intrusive;
pub mod kle;
pub mod linalg;
pub mod lognormal;
pub mod mesh;
pub mod nisp;
pub mod pce;
pub mod postproc;
pub mod problem;
pub mod sparsegrid;

pub use error::{Error, Result};
pub use fem::{assemble_load, assemble_stiffness, solve_deterministic, Assembler};
pub use field::{FieldRole, StochasticField};
pub use intrusive::{assemble_mode_matrices, block_apply, solve_intrusive, stochastic_rhs, BlockOperator};
pub use kle::{eigen_1d, eigen_2d, partial_sum_ratio, GaussianModes, KlExpansion2D};
pub use linalg::{pcg, CgReport, CgSettings, CsrMatrix, LinearOperator};
pub use lognormal::{lognormal_pce, lognormal_sample};
pub use mesh::{structured_mesh, TriMesh};
pub use nisp::{nisp_solve, project, NispSolution};
pub use pce::{build_basis, build_cijk, term_count, CijkTensor, MultiIndex, PceBasis};
pub use postproc::{compare_fields, export_vtk, field_stats, ComparisonReport, FieldStats};
pub use problem::ProblemConfig;
pub use sparsegrid::{gauss_hermite, sample_count, smolyak, Quadrature1D, SparseGrid};

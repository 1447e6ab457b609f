//! Shared fixtures for the kernel benchmarks.

use ssfem::{intrusive::build_operator, BlockOperator, ProblemConfig, Result, TriMesh};

/// Structured-mesh problem with the default stochastic setup.
pub fn problem(n: usize, dim: usize, p_u: usize) -> ProblemConfig {
    ProblemConfig {
        nx: n,
        ny: n,
        dim,
        p_u,
        ..Default::default()
    }
}

/// Mesh plus coupled operator, ready for `block_apply`.
pub fn operator(cfg: &ProblemConfig) -> Result<(TriMesh, BlockOperator)> {
    let mesh = cfg.build_mesh()?;
    let l = cfg.input_field(&mesh)?;
    let op = build_operator(&mesh, &l, &cfg.solution_basis()?)?;
    Ok((mesh, op))
}

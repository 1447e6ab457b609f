//! Non-intrusive spectral projection: independent deterministic solves at the
//! sparse-grid nodes, then `u_k = sum_q w_q u(xi_q) Psi_k(xi_q) / <Psi_k^2>`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble_load, check_positive, deterministic_settings, solve_system, Assembler};
use crate::field::{FieldRole, StochasticField};
use crate::kle::GaussianModes;
use crate::lognormal::lognormal_sample;
use crate::mesh::TriMesh;
use crate::pce::PceBasis;
use crate::sparsegrid::SparseGrid;

/// Projects nodal responses `samples[q]` taken at `grid.points[q]` onto `basis`.
///
/// Contributions are accumulated in grid order, so the result does not depend on
/// how the samples were computed.
pub fn project(basis: &PceBasis, grid: &SparseGrid, samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if grid.dim != basis.dim() {
        return Err(Error::DimensionMismatch {
            what: "sparse grid vs chaos dimension",
            expected: basis.dim(),
            actual: grid.dim,
        });
    }
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            what: "samples vs grid nodes",
            expected: grid.len(),
            actual: samples.len(),
        });
    }
    let n = samples.first().map_or(0, Vec::len);
    if let Some(s) = samples.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            what: "sample length",
            expected: n,
            actual: s.len(),
        });
    }
    let mut coeffs = vec![vec![0.0; n]; basis.len()];
    for ((xi, &w), u) in grid.points.iter().zip(&grid.weights).zip(samples) {
        let psi = basis.eval_all(xi)?;
        for (row, p) in coeffs.iter_mut().zip(&psi) {
            let s = w * p;
            for (c, v) in row.iter_mut().zip(u) {
                *c += s * v;
            }
        }
    }
    for (row, var) in coeffs.iter_mut().zip(basis.variances()) {
        row.iter_mut().for_each(|c| *c /= var);
    }
    Ok(coeffs)
}

#[derive(Debug, Clone)]
pub struct NispSolution {
    pub field: StochasticField,
    /// Deterministic solves performed.
    pub samples: usize,
    /// Largest CG iteration count over all samples.
    pub max_iterations: usize,
}

/// Solves `-div(exp(g(xi)) grad u) = f` at every grid node with the exact
/// lognormal coefficient and projects the responses onto `basis_u`.
pub fn nisp_solve(
    mesh: &TriMesh,
    modes: &GaussianModes,
    basis_u: &PceBasis,
    grid: &SparseGrid,
    f: f64,
) -> Result<NispSolution> {
    if modes.dim() != basis_u.dim() {
        return Err(Error::DimensionMismatch {
            what: "Gaussian modes vs chaos dimension",
            expected: basis_u.dim(),
            actual: modes.dim(),
        });
    }
    if modes.num_nodes() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "Gaussian mode length",
            expected: mesh.num_nodes(),
            actual: modes.num_nodes(),
        });
    }
    let assembler = Assembler::new(mesh)?;
    let load = assemble_load(mesh, f);
    let settings = deterministic_settings(mesh.num_nodes());

    let solved: Vec<(Vec<f64>, usize)> = grid
        .points
        .par_iter()
        .enumerate()
        .map(|(q, xi)| {
            let sample = || -> Result<(Vec<f64>, usize)> {
                let coeff = lognormal_sample(modes, xi)?;
                check_positive(&coeff)?;
                let a = assembler.stiffness(&coeff)?;
                let (u, report) = solve_system(a, load.clone(), mesh.boundary_mask(), settings)?;
                Ok((u, report.iterations))
            };
            sample().map_err(|e| Error::SampleFailed {
                node: q,
                point: xi.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let max_iterations = solved.iter().map(|s| s.1).max().unwrap_or(0);
    let samples: Vec<Vec<f64>> = solved.into_iter().map(|s| s.0).collect();
    let coeffs = project(basis_u, grid, &samples)?;
    log::debug!("NISP: {} samples, at most {max_iterations} CG iterations", samples.len());
    Ok(NispSolution {
        field: StochasticField::new(basis_u.clone(), coeffs, FieldRole::Solution)?,
        samples: samples.len(),
        max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solve_deterministic;
    use crate::mesh::structured_mesh;
    use crate::pce::build_basis;
    use crate::sparsegrid::smolyak;

    fn synthetic(basis: &PceBasis, coeffs: &[Vec<f64>], grid: &SparseGrid) -> Vec<Vec<f64>> {
        grid.points
            .iter()
            .map(|xi| {
                let psi = basis.eval_all(xi).unwrap();
                (0..coeffs[0].len())
                    .map(|node| coeffs.iter().zip(&psi).map(|(c, p)| c[node] * p).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn recovers_degree_two_polynomial() {
        let basis = build_basis(3, 2).unwrap();
        let coeffs: Vec<Vec<f64>> = (0..basis.len())
            .map(|j| vec![1.0 + j as f64, 0.5 - 0.1 * j as f64])
            .collect();
        let grid = smolyak(3, 3).unwrap();
        let got = project(&basis, &grid, &synthetic(&basis, &coeffs, &grid)).unwrap();
        for (g, w) in got.iter().flatten().zip(coeffs.iter().flatten()) {
            assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn projection_is_linear() {
        let basis = build_basis(2, 3).unwrap();
        let grid = smolyak(2, 4).unwrap();
        let a: Vec<Vec<f64>> = grid.points.iter().map(|x| vec![(x[0] * x[1]).sin(), x[0].exp()]).collect();
        let b: Vec<Vec<f64>> = grid.points.iter().map(|x| vec![x[1].powi(3), 1.0 / (1.0 + x[0] * x[0])]).collect();
        let ab: Vec<Vec<f64>> = a.iter().zip(&b).map(|(u, v)| u.iter().zip(v).map(|(p, q)| p + q).collect()).collect();
        let pa = project(&basis, &grid, &a).unwrap();
        let pb = project(&basis, &grid, &b).unwrap();
        let pab = project(&basis, &grid, &ab).unwrap();
        for ((x, y), z) in pa.iter().flatten().zip(pb.iter().flatten()).zip(pab.iter().flatten()) {
            assert!((x + y - z).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_coefficient() {
        let mesh = structured_mesh(6, 6).unwrap();
        let n = mesh.num_nodes();
        let modes = GaussianModes {
            mean: vec![0.2; n],
            modes: vec![vec![0.0; n]; 2],
        };
        let basis = build_basis(2, 2).unwrap();
        let grid = smolyak(2, 3).unwrap();
        let sol = nisp_solve(&mesh, &modes, &basis, &grid, 1.0).unwrap();
        assert_eq!(sol.samples, 13);
        let det = solve_deterministic(&mesh, &vec![0.2f64.exp(); n], 1.0).unwrap();
        for (a, b) in sol.field.coeff(0).iter().zip(&det) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(sol.field.coeffs()[1..].iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn shape_errors() {
        let basis = build_basis(2, 1).unwrap();
        let grid = smolyak(3, 2).unwrap();
        assert!(project(&basis, &grid, &vec![vec![0.0]; grid.len()]).is_err());
        let grid2 = smolyak(2, 2).unwrap();
        assert!(project(&basis, &grid2, &[vec![0.0]]).is_err());
    }
}

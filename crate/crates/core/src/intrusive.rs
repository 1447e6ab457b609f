//! Intrusive stochastic Galerkin system.
//!
//! With `A(xi) ~ sum_i A_i Psi_i(xi)` and `u(xi) ~ sum_j u_j Psi_j(xi)`, Galerkin
//! projection onto `Psi_k` gives `sum_j (sum_i C_ijk A_i) u_j = f_k` for every
//! `k <= P_u`. The block operator keeps the `A_i` and contracts through the stored
//! `C_ijk` entries at apply time instead of forming the coupled matrix.

use crate::error::{Error, Result};
use crate::fem::Assembler;
use crate::field::{FieldRole, StochasticField};
use crate::linalg::{pcg, CgReport, CgSettings, CsrMatrix, LinearOperator};
use crate::mesh::TriMesh;
use crate::pce::{build_cijk, CijkTensor, PceBasis};
use rayon::prelude::*;

/// Relative residual target of the coupled solve.
pub const INTRUSIVE_TOL: f64 = 1e-8;

/// One stiffness matrix per input chaos term, `A_i = K(l_i)`; exactly one
/// deterministic assembly per term.
pub fn assemble_mode_matrices(mesh: &TriMesh, l_field: &StochasticField) -> Result<Vec<CsrMatrix>> {
    if l_field.role() != FieldRole::InputCoefficient {
        return Err(Error::InvalidArgument(
            "mode matrices need an input-coefficient field".into(),
        ));
    }
    let assembler = Assembler::new(mesh)?;
    l_field.coeffs().iter().map(|row| assembler.stiffness(row)).collect()
}

/// Implicit coupled operator `y_k = sum_j sum_i C_ijk A_i x_j` on block vectors
/// of `blocks` blocks of length `n`.
///
/// Constrained (Dirichlet) nodes have their rows and columns removed from every
/// `A_i`; the operator acts as the identity on them inside each diagonal block.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    modes: Vec<CsrMatrix>,
    cijk: CijkTensor,
    n: usize,
    blocks: usize,
    constrained: Vec<bool>,
    /// Distinct `(i, j)` pairs of the stored entries; one product `A_i x_j` each.
    products: Vec<(usize, usize)>,
    /// Per output block `k`: `(product index, C_ijk)` in entry order.
    gather: Vec<Vec<(usize, f64)>>,
}

impl BlockOperator {
    /// Pass an all-`false` mask for an unconstrained operator.
    pub fn new(mut modes: Vec<CsrMatrix>, cijk: CijkTensor, constrained: &[bool]) -> Result<Self> {
        let (n_in, n_out, _) = cijk.shape();
        if modes.len() != n_in {
            return Err(Error::DimensionMismatch {
                what: "mode matrices vs C_ijk input terms",
                expected: n_in,
                actual: modes.len(),
            });
        }
        let n = modes[0].dim();
        if constrained.len() != n {
            return Err(Error::DimensionMismatch {
                what: "constraint mask",
                expected: n,
                actual: constrained.len(),
            });
        }
        if let Some(m) = modes.iter().find(|m| !m.same_pattern(&modes[0])) {
            return Err(Error::DimensionMismatch {
                what: "mode matrix pattern",
                expected: modes[0].nnz(),
                actual: m.nnz(),
            });
        }
        for m in &mut modes {
            m.constrain(constrained, 0.0);
        }

        let mut products: Vec<(usize, usize)> = Vec::new();
        let mut gather = vec![Vec::new(); n_out];
        for e in cijk.entries() {
            if products.last() != Some(&(e.i, e.j)) {
                products.push((e.i, e.j));
            }
            gather[e.k].push((products.len() - 1, e.value));
        }
        Ok(BlockOperator {
            modes,
            cijk,
            n,
            blocks: n_out,
            constrained: constrained.to_vec(),
            products,
            gather,
        })
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn modes(&self) -> &[CsrMatrix] {
        &self.modes
    }

    pub fn cijk(&self) -> &CijkTensor {
        &self.cijk
    }

    /// Mean-based block-Jacobi diagonal: `<Psi_k^2> diag(A_0)` in block `k`.
    pub fn mean_diagonal(&self) -> Vec<f64> {
        let d0 = self.modes[0].diagonal();
        let mut out = Vec::with_capacity(self.n * self.blocks);
        for k in 0..self.blocks {
            let scale = self.cijk.get(0, k, k);
            out.extend(d0.iter().zip(&self.constrained).map(|(&d, &c)| if c { 1.0 } else { scale * d }));
        }
        out
    }

    /// Explicit coupled matrix, row block `k`, column block `j`. Only meant for tiny
    /// meshes.
    pub fn assemble_dense(&self) -> Vec<Vec<f64>> {
        let total = self.n * self.blocks;
        let mut dense = vec![vec![0.0; total]; total];
        for e in self.cijk.entries() {
            if e.j >= self.blocks || e.k >= self.blocks {
                continue;
            }
            let a = &self.modes[e.i];
            for r in 0..self.n {
                for (c, v) in a.row(r) {
                    dense[e.k * self.n + r][e.j * self.n + c] += e.value * v;
                }
            }
        }
        for k in 0..self.blocks {
            for (r, &c) in self.constrained.iter().enumerate() {
                if c {
                    dense[k * self.n + r][k * self.n + r] = 1.0;
                }
            }
        }
        dense
    }
}

impl LinearOperator for BlockOperator {
    fn dim(&self) -> usize {
        self.n * self.blocks
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let products: Vec<Vec<f64>> = self
            .products
            .par_iter()
            .map(|&(i, j)| self.modes[i].mul_vec(&x[j * n..(j + 1) * n]))
            .collect();
        y.par_chunks_mut(n).enumerate().for_each(|(k, yk)| {
            yk.iter_mut().for_each(|v| *v = 0.0);
            for &(p, c) in &self.gather[k] {
                for (o, t) in yk.iter_mut().zip(&products[p]) {
                    *o += c * t;
                }
            }
            for ((o, &c), xv) in yk.iter_mut().zip(&self.constrained).zip(&x[k * n..(k + 1) * n]) {
                if c {
                    *o = *xv;
                }
            }
        });
    }
}

/// `y = op(x)`, checking the length of `x`.
pub fn block_apply(op: &BlockOperator, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            what: "block vector",
            expected: op.dim(),
            actual: x.len(),
        });
    }
    let mut y = vec![0.0; x.len()];
    op.apply(x, &mut y);
    Ok(y)
}

/// Right-hand side `f_k = <f Psi_k>` of a deterministic load: block 0 is the load,
/// the other blocks vanish.
pub fn stochastic_rhs(load: &[f64], basis: &PceBasis) -> Vec<f64> {
    let mut rhs = vec![0.0; load.len() * basis.len()];
    rhs[..load.len()].copy_from_slice(load);
    rhs
}

#[derive(Debug, Clone)]
pub struct IntrusiveSolution {
    pub field: StochasticField,
    pub report: CgReport,
    /// Stored `C_ijk` entries driving the block operator.
    pub cijk_nnz: usize,
}

/// Builds the block operator for `l_field` with output basis `basis_u`,
/// constrained on the mesh boundary.
pub fn build_operator(mesh: &TriMesh, l_field: &StochasticField, basis_u: &PceBasis) -> Result<BlockOperator> {
    let modes = assemble_mode_matrices(mesh, l_field)?;
    let cijk = build_cijk(l_field.basis(), basis_u)?;
    BlockOperator::new(modes, cijk, mesh.boundary_mask())
}

/// Solves the coupled Galerkin system for all solution coefficients at once.
pub fn solve_intrusive(
    mesh: &TriMesh,
    l_field: &StochasticField,
    load: &[f64],
    basis_u: &PceBasis,
    settings: CgSettings,
) -> Result<IntrusiveSolution> {
    if load.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "load vector",
            expected: mesh.num_nodes(),
            actual: load.len(),
        });
    }
    let op = build_operator(mesh, l_field, basis_u)?;
    let mut rhs = stochastic_rhs(load, basis_u);
    let n = mesh.num_nodes();
    for (r, &c) in mesh.boundary_mask().iter().enumerate() {
        if c {
            for k in 0..basis_u.len() {
                rhs[k * n + r] = 0.0;
            }
        }
    }
    let mut x = vec![0.0; rhs.len()];
    let report = pcg(&op, &op.mean_diagonal(), &rhs, &mut x, settings)?;
    let coeffs = x.chunks(n).map(<[f64]>::to_vec).collect();
    Ok(IntrusiveSolution {
        field: StochasticField::new(basis_u.clone(), coeffs, FieldRole::Solution)?,
        report,
        cijk_nnz: op.cijk().nnz(),
    })
}

/// Default settings for a coupled system of total size `dim`.
pub fn intrusive_settings(dim: usize) -> CgSettings {
    CgSettings {
        rel_tol: INTRUSIVE_TOL,
        max_iter: 10 * dim.max(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_load, assemble_stiffness};
    use crate::kle::GaussianModes;
    use crate::lognormal::lognormal_pce;
    use crate::mesh::structured_mesh;
    use crate::pce::build_basis;

    fn setup(sigma: f64) -> (TriMesh, StochasticField, PceBasis) {
        let mesh = structured_mesh(4, 4).unwrap();
        let n = mesh.num_nodes();
        let modes = GaussianModes {
            mean: vec![0.0; n],
            modes: (0..2)
                .map(|j| mesh.nodes().iter().map(|p| sigma * (1.0 + j as f64 * p[0] - p[1])).collect())
                .collect(),
        };
        let basis_a = build_basis(2, 4).unwrap();
        let l = lognormal_pce(&modes, &basis_a).unwrap();
        (mesh, l, build_basis(2, 2).unwrap())
    }

    #[test]
    fn mean_mode_is_the_mean_stiffness() {
        let (mesh, l, _) = setup(0.2);
        let modes = assemble_mode_matrices(&mesh, &l).unwrap();
        assert_eq!(modes.len(), l.num_terms());
        assert_eq!(modes[0], assemble_stiffness(&mesh, l.coeff(0)).unwrap());
        for m in &modes {
            assert!(m.asymmetry() < 1e-12);
            assert!(m.same_pattern(&modes[0]));
        }
        let (_, l_small, _) = setup(1e-9);
        let small = assemble_mode_matrices(&mesh, &l_small).unwrap();
        assert!(small[1..].iter().all(|m| m.max_abs() < 1e-8));
    }

    #[test]
    fn single_block_reduces_to_mean_operator() {
        let (mesh, l, _) = setup(0.2);
        let basis0 = build_basis(2, 0).unwrap();
        let op = build_operator(&mesh, &l, &basis0).unwrap();
        let x: Vec<f64> = (0..mesh.num_nodes()).map(|i| (i as f64).cos()).collect();
        let y = block_apply(&op, &x).unwrap();
        let mut a0 = assemble_stiffness(&mesh, l.coeff(0)).unwrap();
        a0.constrain(mesh.boundary_mask(), 1.0);
        let want = a0.mul_vec(&x);
        for (a, b) in y.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(block_apply(&op, &x[1..]).is_err());
    }

    #[test]
    fn rhs_blocks() {
        let mesh = structured_mesh(3, 3).unwrap();
        let basis = build_basis(2, 2).unwrap();
        let load = assemble_load(&mesh, 1.0);
        let rhs = stochastic_rhs(&load, &basis);
        assert_eq!(rhs.len(), load.len() * basis.len());
        assert_eq!(&rhs[..load.len()], &load[..]);
        assert!(rhs[load.len()..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn operator_is_symmetric() {
        let (mesh, l, basis_u) = setup(0.3);
        let op = build_operator(&mesh, &l, &basis_u).unwrap();
        let dim = op.dim();
        let x: Vec<f64> = (0..dim).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
        let y: Vec<f64> = (0..dim).map(|i| ((i * 5 % 11) as f64 - 5.0) / 5.0).collect();
        let ax = block_apply(&op, &x).unwrap();
        let ay = block_apply(&op, &y).unwrap();
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = ay.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn rejects_solution_fields_and_bad_shapes() {
        let (mesh, l, basis_u) = setup(0.1);
        let sol = StochasticField::new(l.basis().clone(), l.coeffs().to_vec(), FieldRole::Solution).unwrap();
        assert!(assemble_mode_matrices(&mesh, &sol).is_err());
        let modes = assemble_mode_matrices(&mesh, &l).unwrap();
        let cijk = build_cijk(&basis_u, &basis_u).unwrap();
        assert!(BlockOperator::new(modes, cijk, mesh.boundary_mask()).is_err());
        let settings = intrusive_settings(10);
        assert!(solve_intrusive(&mesh, &l, &[1.0; 3], &basis_u, settings).is_err());
    }
}

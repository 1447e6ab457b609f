//! Linear (P1) triangle elements for `-div(c grad u) = F` with homogeneous
//! Dirichlet conditions on the whole boundary.
//!
//! The coefficient is given at the nodes; each element uses the mean of its three
//! vertex values (one-point centroid rule).

use crate::error::{Error, Result};
use crate::linalg::{pcg, CgReport, CgSettings, CsrMatrix};
use crate::mesh::{signed_area, TriMesh};

/// Relative residual target for single-sample solves.
pub const DETERMINISTIC_TOL: f64 = 1e-10;

/// Constant P1 basis gradients of a triangle, and its area.
fn p1_gradients(v: &[[f64; 2]; 3]) -> Option<([[f64; 2]; 3], f64)> {
    let area = signed_area(v[0], v[1], v[2]);
    if area.abs() <= f64::MIN_POSITIVE || !area.is_finite() {
        return None;
    }
    let twice = 2.0 * area;
    let grads = [
        [(v[1][1] - v[2][1]) / twice, (v[2][0] - v[1][0]) / twice],
        [(v[2][1] - v[0][1]) / twice, (v[0][0] - v[2][0]) / twice],
        [(v[0][1] - v[1][1]) / twice, (v[1][0] - v[0][0]) / twice],
    ];
    Some((grads, area.abs()))
}

/// `K[r][s] = coeff * |T| * grad(phi_r) . grad(phi_s)`.
pub fn element_stiffness(vertices: [[f64; 2]; 3], coeff: f64) -> Result<[[f64; 3]; 3]> {
    let (g, area) = p1_gradients(&vertices).ok_or(Error::DegenerateTriangle {
        triangle: 0,
        area: signed_area(vertices[0], vertices[1], vertices[2]),
    })?;
    let mut k = [[0.0; 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            k[r][s] = coeff * area * (g[r][0] * g[s][0] + g[r][1] * g[s][1]);
        }
    }
    Ok(k)
}

/// Reusable assembly data for one mesh: the global sparsity pattern, the value
/// slots every element scatters into, and unit-coefficient element matrices.
#[derive(Debug, Clone)]
pub struct Assembler {
    pattern: CsrMatrix,
    triangles: Vec<[usize; 3]>,
    slots: Vec<[usize; 9]>,
    unit_elements: Vec<[[f64; 3]; 3]>,
}

impl Assembler {
    pub fn new(mesh: &TriMesh) -> Result<Self> {
        let n = mesh.num_nodes();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for t in mesh.triangles() {
            for &a in t {
                rows[a].extend_from_slice(t);
            }
        }
        let pattern = CsrMatrix::from_pattern(&rows);
        let mut slots = Vec::with_capacity(mesh.num_triangles());
        let mut unit_elements = Vec::with_capacity(mesh.num_triangles());
        for (e, t) in mesh.triangles().iter().enumerate() {
            let k = element_stiffness(mesh.vertices(e), 1.0).map_err(|_| Error::DegenerateTriangle {
                triangle: e,
                area: mesh.area(e),
            })?;
            let mut s = [0usize; 9];
            for r in 0..3 {
                for c in 0..3 {
                    s[3 * r + c] = pattern.slot(t[r], t[c]).expect("element entry in pattern");
                }
            }
            slots.push(s);
            unit_elements.push(k);
        }
        Ok(Assembler {
            pattern,
            triangles: mesh.triangles().to_vec(),
            slots,
            unit_elements,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.pattern.dim()
    }

    /// Global stiffness matrix for nodal coefficient values `coeff`.
    pub fn stiffness(&self, coeff: &[f64]) -> Result<CsrMatrix> {
        if coeff.len() != self.num_nodes() {
            return Err(Error::DimensionMismatch {
                what: "nodal coefficient",
                expected: self.num_nodes(),
                actual: coeff.len(),
            });
        }
        let mut a = self.pattern.clone();
        let values = a.values_mut();
        for ((tri, slots), k) in self.triangles.iter().zip(&self.slots).zip(&self.unit_elements) {
            let c = (coeff[tri[0]] + coeff[tri[1]] + coeff[tri[2]]) / 3.0;
            for r in 0..3 {
                for s in 0..3 {
                    values[slots[3 * r + s]] += c * k[r][s];
                }
            }
        }
        Ok(a)
    }
}

/// Assembles the global stiffness matrix for nodal coefficient values.
pub fn assemble_stiffness(mesh: &TriMesh, coeff: &[f64]) -> Result<CsrMatrix> {
    Assembler::new(mesh)?.stiffness(coeff)
}

/// Load vector of a constant source: every triangle adds `f |T| / 3` per vertex.
pub fn assemble_load(mesh: &TriMesh, f: f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_nodes()];
    for (e, t) in mesh.triangles().iter().enumerate() {
        let share = f * mesh.area(e) / 3.0;
        for &v in t {
            load[v] += share;
        }
    }
    load
}

/// Load vector of a nodal source; each triangle uses its vertex mean.
pub fn assemble_load_nodal(mesh: &TriMesh, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "nodal source",
            expected: mesh.num_nodes(),
            actual: f.len(),
        });
    }
    let mut load = vec![0.0; mesh.num_nodes()];
    for (e, t) in mesh.triangles().iter().enumerate() {
        let share = (f[t[0]] + f[t[1]] + f[t[2]]) / 3.0 * mesh.area(e) / 3.0;
        for &v in t {
            load[v] += share;
        }
    }
    Ok(load)
}

/// Symmetric elimination of homogeneous Dirichlet nodes: constrained rows and
/// columns are zeroed, their diagonal set to one and their load entries zeroed.
pub fn apply_dirichlet(matrix: &mut CsrMatrix, rhs: &mut [f64], constrained: &[bool]) {
    matrix.constrain(constrained, 1.0);
    for (r, &c) in rhs.iter_mut().zip(constrained) {
        if c {
            *r = 0.0;
        }
    }
}

/// Default solver settings for an `n`-node system.
pub fn deterministic_settings(n: usize) -> CgSettings {
    CgSettings {
        rel_tol: DETERMINISTIC_TOL,
        max_iter: 10 * n.max(1),
    }
}

/// Solves an already assembled system after applying the boundary conditions.
pub fn solve_system(
    mut matrix: CsrMatrix,
    mut rhs: Vec<f64>,
    constrained: &[bool],
    settings: CgSettings,
) -> Result<(Vec<f64>, CgReport)> {
    apply_dirichlet(&mut matrix, &mut rhs, constrained);
    let mut u = vec![0.0; rhs.len()];
    let report = pcg(&matrix, &matrix.diagonal(), &rhs, &mut u, settings)?;
    Ok((u, report))
}

pub(crate) fn check_positive(coeff: &[f64]) -> Result<()> {
    if let Some((i, c)) = coeff.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "diffusion coefficient must be positive, node {i} has {c}"
        )));
    }
    Ok(())
}

/// Solution of `-div(c grad u) = f` (constant `f`) with `u = 0` on the boundary.
pub fn solve_deterministic(mesh: &TriMesh, coeff: &[f64], f: f64) -> Result<Vec<f64>> {
    check_positive(coeff)?;
    let a = assemble_stiffness(mesh, coeff)?;
    let load = assemble_load(mesh, f);
    let (u, _) = solve_system(a, load, mesh.boundary_mask(), deterministic_settings(mesh.num_nodes()))?;
    Ok(u)
}

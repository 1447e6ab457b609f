//! Hermite polynomial chaos: multi-indices, basis evaluation, variances and the
//! triple-product moment tensor `C_ijk = <Psi_i Psi_j Psi_k>`.
//!
//! Polynomials are the probabilists' Hermite family, orthogonal under the
//! standard normal density, so `<Psi_0^2> = 1` and `<Psi_j^2> = prod_d m_d!`.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparsegrid::gauss_hermite;

/// `C_ijk` entries at or below this magnitude are treated as zero.
pub const CIJK_DROP_TOL: f64 = 1e-12;

/// Per-dimension polynomial orders of one chaos term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(orders: Vec<usize>) -> Self {
        MultiIndex(orders)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `sum_d m_d`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// `prod_d m_d!`, the squared norm of the corresponding chaos.
    pub fn variance(&self) -> f64 {
        self.0.iter().map(|&m| factorial(m)).product()
    }

    /// 1-based index of the highest variable with a non-zero order (0 for the constant).
    fn highest_active(&self) -> usize {
        self.0.iter().rposition(|&m| m > 0).map_or(0, |i| i + 1)
    }

    /// Orders in the within-group comparison sequence `(m_1, m_k, m_{k-1}, .., m_2)`.
    fn ordering_key(&self) -> Vec<usize> {
        let k = self.highest_active();
        let mut key = Vec::with_capacity(k);
        if k > 0 {
            key.push(self.0[0]);
            key.extend((1..k).rev().map(|i| self.0[i]));
        }
        key
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Total-order Hermite chaos basis of dimension `dim` and order `order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PceBasis {
    dim: usize,
    order: usize,
    terms: Vec<MultiIndex>,
    variances: Vec<f64>,
}

/// Number of terms `(L+p)! / (L! p!)` of a total-order basis.
pub fn term_count(dim: usize, order: usize) -> usize {
    // multiplicative form keeps intermediates exact for the sizes used here
    let mut count: u128 = 1;
    for i in 1..=order as u128 {
        count = count * (dim as u128 + i) / i;
    }
    count as usize
}

/// All multi-indices of dimension `dim` with total degree exactly `degree`.
fn indices_of_degree(dim: usize, degree: usize) -> Vec<MultiIndex> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for m in 0..=left {
            cur[pos] = m;
            rec(pos + 1, left - m, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, degree, &mut vec![0; dim], &mut out);
    out
}

/// Builds the graded basis.
///
/// Terms are grouped by ascending total degree. Inside a degree block they are
/// grouped by the highest active variable `k` (ascending); inside such a group they
/// are sorted in descending lexicographic order of `(m_1, m_k, m_{k-1}, .., m_2)`.
/// For `dim = 3, order = 2` this yields
/// `1, x1, x2, x3, x1^2-1, x1x2, x2^2-1, x1x3, x3^2-1, x2x3`.
/// A lower-order basis is always a prefix of a higher-order one.
pub fn build_basis(dim: usize, order: usize) -> Result<PceBasis> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "polynomial chaos dimension must be at least 1".into(),
        ));
    }
    let mut terms = Vec::with_capacity(term_count(dim, order));
    for degree in 0..=order {
        let mut block = indices_of_degree(dim, degree);
        block.sort_by(|a, b| {
            a.highest_active()
                .cmp(&b.highest_active())
                .then_with(|| b.ordering_key().cmp(&a.ordering_key()))
        });
        terms.extend(block);
    }
    let variances = terms.iter().map(MultiIndex::variance).collect();
    Ok(PceBasis {
        dim,
        order,
        terms,
        variances,
    })
}

/// Probabilists' Hermite polynomial `He_n(x)` by the three-term recurrence.
pub fn hermite_1d(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 2..=n {
                let next = x * cur - (k - 1) as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `He_0(x) .. He_n(x)` in one pass.
pub fn hermite_1d_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        let next = x * out[k - 1] - (k - 1) as f64 * out[k - 2];
        out.push(next);
    }
    out
}

impl PceBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[MultiIndex] {
        &self.terms
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn term(&self, j: usize) -> Result<&MultiIndex> {
        self.terms.get(j).ok_or(Error::IndexOutOfRange {
            what: "chaos basis",
            index: j,
            len: self.terms.len(),
        })
    }

    /// `<Psi_j^2> = prod_d m_d!`.
    pub fn psi_variance(&self, j: usize) -> Result<f64> {
        self.term(j)?;
        Ok(self.variances[j])
    }

    /// `Psi_j(xi) = prod_d He_{m_d}(xi_d)`.
    pub fn eval_psi(&self, j: usize, xi: &[f64]) -> Result<f64> {
        let term = self.term(j)?;
        self.check_point(xi)?;
        Ok(term
            .orders()
            .iter()
            .zip(xi)
            .map(|(&m, &x)| hermite_1d(m, x))
            .product())
    }

    /// Every basis function evaluated at `xi`.
    pub fn eval_all(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_point(xi)?;
        let tables: Vec<Vec<f64>> = xi.iter().map(|&x| hermite_1d_all(self.order, x)).collect();
        Ok(self
            .terms
            .iter()
            .map(|t| {
                t.orders()
                    .iter()
                    .zip(&tables)
                    .map(|(&m, table)| table[m])
                    .product()
            })
            .collect())
    }

    /// Sum of `coeffs[j] * Psi_j(xi)`.
    pub fn eval_expansion(&self, coeffs: &[f64], xi: &[f64]) -> Result<f64> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "expansion coefficients",
                expected: self.len(),
                actual: coeffs.len(),
            });
        }
        Ok(self
            .eval_all(xi)?
            .iter()
            .zip(coeffs)
            .map(|(p, c)| p * c)
            .sum())
    }

    fn check_point(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "germ vector",
                expected: self.dim,
                actual: xi.len(),
            });
        }
        Ok(())
    }
}

/// Sparse third-order moment tensor `<Psi_i Psi_j Psi_k>` with `i` over an input
/// basis and `j, k` over an output basis. Entries are kept sorted by `(i, j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CijkTensor {
    shape: (usize, usize, usize),
    entries: Vec<CijkEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CijkEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// Table of one-dimensional moments `<He_a He_b He_c>` for `a, b, c <= max`.
struct TripleMoments1D {
    max: usize,
    values: Vec<f64>,
}

impl TripleMoments1D {
    fn new(max: usize) -> Self {
        let n = max + 1;
        // rules[level - 1] = (weights, He_0..He_max at every node)
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (1..=(3 * max).div_ceil(2) + 1)
            .map(|level| {
                let q = gauss_hermite(level);
                let table = q.nodes.iter().flat_map(|&x| hermite_1d_all(max, x)).collect();
                (q.weights, table)
            })
            .collect();
        let mut values = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let s = a + b + c;
                    // odd total degree integrates to zero; the triangle inequality
                    // is also necessary for a non-zero moment
                    if s % 2 == 1 || a > b + c || b > a + c || c > a + b {
                        continue;
                    }
                    let (weights, table) = &rules[s.div_ceil(2)];
                    let mut acc = 0.0;
                    for (node, w) in weights.iter().enumerate() {
                        let he = &table[node * n..(node + 1) * n];
                        acc += w * he[a] * he[b] * he[c];
                    }
                    values[(a * n + b) * n + c] = acc;
                }
            }
        }
        TripleMoments1D { max, values }
    }

    fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.max + 1;
        self.values[(a * n + b) * n + c]
    }
}

/// Builds `C_ijk` from products of one-dimensional Gauss-Hermite triple moments.
pub fn build_cijk(basis_in: &PceBasis, basis_out: &PceBasis) -> Result<CijkTensor> {
    if basis_in.dim() != basis_out.dim() {
        return Err(Error::DimensionMismatch {
            what: "C_ijk basis dimension",
            expected: basis_in.dim(),
            actual: basis_out.dim(),
        });
    }
    let max = basis_in.order().max(basis_out.order());
    let moments = TripleMoments1D::new(max);
    let mut entries = Vec::new();
    for (i, ti) in basis_in.terms().iter().enumerate() {
        for (j, tj) in basis_out.terms().iter().enumerate() {
            for (k, tk) in basis_out.terms().iter().enumerate() {
                let mut value = 1.0;
                for d in 0..basis_in.dim() {
                    value *= moments.get(ti.0[d], tj.0[d], tk.0[d]);
                    if value == 0.0 {
                        break;
                    }
                }
                if value.abs() > CIJK_DROP_TOL {
                    entries.push(CijkEntry { i, j, k, value });
                }
            }
        }
    }
    Ok(CijkTensor {
        shape: (basis_in.len(), basis_out.len(), basis_out.len()),
        entries,
    })
}

impl CijkTensor {
    /// `(P_A + 1, P_u + 1, P_u + 1)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    pub fn entries(&self) -> &[CijkEntry] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Stored value at `(i, j, k)`, or zero.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.i, e.j, e.k).cmp(&(i, j, k)))
            .map_or(0.0, |pos| self.entries[pos].value)
    }

    /// Debug dump: one `i j k value` line per stored entry, 15 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(out, "{} {} {} {:.14e}", e.i, e.j, e.k, e.value)?;
        }
        Ok(())
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = std::io::BufWriter::new(file);
        self.write_text(&mut writer)
            .and_then(|_| writer.flush())
            .map_err(|e| Error::io(path, e))
    }
}

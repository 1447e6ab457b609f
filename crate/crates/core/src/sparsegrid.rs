//! Gauss-Hermite rules for the standard normal measure and Smolyak sparse grids
//! built from them.
//!
//! The level-`l` one-dimensional rule has exactly `l` nodes (linear growth) and is
//! exact for polynomials of degree `2l - 1`. Nodes and weights come from the
//! Golub-Welsch eigen-decomposition of the symmetric tridiagonal Jacobi matrix.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// Coordinates closer than this are treated as the same sparse-grid node.
pub const NODE_DEDUP_TOL: f64 = 1e-12;

/// A one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadrature1D {
    pub level: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigenvalues and eigenvectors of a symmetric tridiagonal matrix by the implicit
/// QL algorithm with Wilkinson-style shifts.
///
/// `diag` has length `n`, `offdiag` length `n - 1` (`offdiag[i]` couples rows `i`
/// and `i + 1`). Returns the eigenvalues (unsorted) and the eigenvector matrix
/// stored row-major, column `j` holding the eigenvector of eigenvalue `j`.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            what: "tridiagonal off-diagonal",
            expected: n - 1,
            actual: offdiag.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::InvalidArgument(format!(
                    "tridiagonal QL failed to converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Golub-Welsch: nodes are the Jacobi-matrix eigenvalues, weights the squared
/// first eigenvector components scaled by the total mass `mu0`.
fn golub_welsch(level: usize, offdiag: &[f64], mu0: f64) -> Quadrature1D {
    let diag = vec![0.0; level];
    let (values, vectors) =
        symmetric_tridiagonal_eigen(&diag, offdiag).expect("Jacobi matrix of a symmetric weight");
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(j, &x)| (x, mu0 * vectors[0][j] * vectors[0][j]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Both weights used here are even, so the rule is symmetric; enforce it exactly
    // so that coincident sparse-grid nodes from different levels are bit-identical.
    let n = pairs.len();
    for i in 0..n / 2 {
        let x = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
        let w = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Quadrature1D {
        level,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Level-`level` Gauss-Hermite rule for the standard normal density.
///
/// # Panics
/// Panics if `level == 0`.
pub fn gauss_hermite(level: usize) -> Quadrature1D {
    assert!(level >= 1, "Gauss-Hermite level must be at least 1");
    let offdiag: Vec<f64> = (1..level).map(|k| (k as f64).sqrt()).collect();
    golub_welsch(level, &offdiag, 1.0)
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]` (weights sum to 2).
///
/// # Panics
/// Panics if `n == 0`.
pub fn gauss_legendre(n: usize) -> Quadrature1D {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(n, &offdiag, 2.0)
}

/// Deduplicated Smolyak nodes with signed combination weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseGrid {
    pub dim: usize,
    pub level: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SparseGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All `d`-tuples of positive integers summing to `total`, in lexicographic order.
pub(crate) fn compositions(total: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=remaining - (slots - 1) {
            prefix.push(first);
            rec(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 || total < d {
        return out;
    }
    rec(total, d, &mut Vec::with_capacity(d), &mut out);
    out
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Smolyak sparse grid of dimension `dim` and level `level` built by the
/// combination technique over Gauss-Hermite rules.
///
/// Multi-levels `l'` with `level <= |l'| <= level + dim - 1` contribute their tensor
/// grid with coefficient `(-1)^(level+dim-1-|l'|) * C(dim-1, level+dim-1-|l'|)`.
/// Coincident nodes are merged by summing weights and nodes whose weights cancel
/// are dropped. Points are returned in lexicographic order.
pub fn smolyak(dim: usize, level: usize) -> Result<SparseGrid> {
    if dim == 0 || level == 0 {
        return Err(Error::InvalidArgument(format!(
            "sparse grid needs dim >= 1 and level >= 1 (got dim={dim}, level={level})"
        )));
    }
    let top = level + dim - 1;
    let rules: Vec<Quadrature1D> = (1..=level).map(gauss_hermite).collect();

    // (point, weight, |weight contribution|)
    let mut raw: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    for total in level.max(dim)..=top {
        let gap = top - total;
        let coeff = if gap.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(dim - 1, gap);
        if coeff == 0.0 {
            continue;
        }
        for levels in compositions(total, dim) {
            let factors: Vec<&Quadrature1D> = levels.iter().map(|&l| &rules[l - 1]).collect();
            let mut counter = vec![0usize; dim];
            loop {
                let point: Vec<f64> = counter
                    .iter()
                    .zip(&factors)
                    .map(|(&c, q)| q.nodes[c])
                    .collect();
                let w = coeff
                    * counter
                        .iter()
                        .zip(&factors)
                        .map(|(&c, q)| q.weights[c])
                        .product::<f64>();
                raw.push((point, w, w.abs()));

                let mut axis = 0;
                while axis < dim {
                    counter[axis] += 1;
                    if counter[axis] < factors[axis].len() {
                        break;
                    }
                    counter[axis] = 0;
                    axis += 1;
                }
                if axis == dim {
                    break;
                }
            }
        }
    }

    raw.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let mut merged: Vec<(Vec<f64>, f64, f64)> = Vec::with_capacity(raw.len());
    for (point, w, mag) in raw {
        if let Some(last) = merged.last_mut() {
            let same = last
                .0
                .iter()
                .zip(&point)
                .all(|(a, b)| (a - b).abs() <= NODE_DEDUP_TOL);
            if same {
                last.1 += w;
                last.2 += mag;
                continue;
            }
        }
        merged.push((point, w, mag));
    }

    let (points, weights) = merged
        .into_iter()
        .filter(|(_, w, mag)| w.abs() > 1e-12 * mag)
        .map(|(p, w, _)| (p, w))
        .unzip();
    Ok(SparseGrid {
        dim,
        level,
        points,
        weights,
    })
}

/// Number of deterministic solves a NISP run on `grid` performs.
pub fn sample_count(grid: &SparseGrid) -> usize {
    grid.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_moment(k: usize) -> f64 {
        // E[x^k] = (k-1)!! for even k
        if k % 2 == 1 {
            0.0
        } else {
            (1..k).step_by(2).map(|v| v as f64).product()
        }
    }

    #[test]
    fn hermite_table_levels() {
        let q1 = gauss_hermite(1);
        assert_eq!(q1.nodes, vec![0.0]);
        assert!((q1.weights[0] - 1.0).abs() < 1e-15);

        let q2 = gauss_hermite(2);
        assert!((q2.nodes[0] + 1.0).abs() < 1e-14 && (q2.nodes[1] - 1.0).abs() < 1e-14);
        assert!(q2.weights.iter().all(|w| (w - 0.5).abs() < 1e-14));

        let q3 = gauss_hermite(3);
        let s3 = 3f64.sqrt();
        assert!((q3.nodes[0] + s3).abs() < 1e-14);
        assert_eq!(q3.nodes[1], 0.0);
        assert!((q3.weights[0] - 1.0 / 6.0).abs() < 1e-14);
        assert!((q3.weights[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_exactness_up_to_degree_2l_minus_1() {
        for level in 1..=12 {
            let q = gauss_hermite(level);
            assert_eq!(q.len(), level);
            for k in 0..2 * level {
                let got = q.integrate(|x| x.powi(k as i32));
                let want = normal_moment(k);
                // odd moments cancel; measure against the absolute moment
                let scale = q.integrate(|x| x.abs().powi(k as i32)).max(1.0);
                assert!(
                    (got - want).abs() <= 1e-12 * scale,
                    "level {level} moment {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let q = gauss_legendre(6);
        assert!((q.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((q.integrate(|x| x.powi(10)) - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_eigen_matches_known_spectrum() {
        // second-difference matrix: eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 7;
        let (mut vals, _) = symmetric_tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        vals.sort_by(f64::total_cmp);
        for (k, v) in vals.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-13);
        }
    }

    #[test]
    fn smolyak_one_dimensional_is_the_gauss_rule() {
        for level in 1..=5 {
            let g = smolyak(1, level).unwrap();
            let q = gauss_hermite(level);
            assert_eq!(g.len(), q.len());
            for (p, x) in g.points.iter().zip(&q.nodes) {
                assert!((p[0] - x).abs() < 1e-15);
            }
            for (a, b) in g.weights.iter().zip(&q.weights) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_zero_arguments() {
        assert!(smolyak(0, 2).is_err());
        assert!(smolyak(2, 0).is_err());
    }

    #[test]
    fn compositions_count() {
        // C(total-1, d-1)
        assert_eq!(compositions(5, 3).len(), 6);
        assert_eq!(compositions(2, 3).len(), 0);
        assert_eq!(compositions(4, 1), vec![vec![4]]);
    }
}

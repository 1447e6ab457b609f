//! Analytic Karhunen-Loeve expansion of the separable exponential covariance
//! `C(x, y) = sigma2 * exp(-|x1 - y1| / b - |x2 - y2| / b)` on `[-a, a]^2`.
//!
//! One-dimensional frequencies solve `1/b - w tan(w a) = 0` (cosine modes, odd
//! indices) and `w + tan(w a) / b = 0` (sine modes, even indices). Two-dimensional
//! eigenpairs are tensor products of the 1D pairs, sorted by decreasing eigenvalue.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Distance kept from the asymptotes of `tan(w a)` when bracketing roots.
const ASYMPTOTE_MARGIN: f64 = 1e-9;
/// Bisection stops once the bracket is narrower than this.
const ROOT_TOL: f64 = 1e-12;
/// Points this far outside `[-a, a]^2` are still accepted (rounding of mapped nodes).
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `cos(w z) / sqrt(a + sin(2 w a) / (2 w))`, odd 1-based index.
    Cosine,
    /// `sin(w z) / sqrt(a - sin(2 w a) / (2 w))`, even 1-based index.
    Sine,
}

impl Branch {
    fn of_index(index: usize) -> Self {
        if index % 2 == 1 {
            Branch::Cosine
        } else {
            Branch::Sine
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenpair1D {
    pub omega: f64,
    pub lambda: f64,
    pub branch: Branch,
    /// Normalisation denominator of the eigenfunction.
    pub norm: f64,
}

impl Eigenpair1D {
    /// Unit-L2 eigenfunction on `[-a, a]` evaluated at `z`.
    pub fn eval(&self, z: f64) -> f64 {
        match self.branch {
            Branch::Cosine => (self.omega * z).cos() / self.norm,
            Branch::Sine => (self.omega * z).sin() / self.norm,
        }
    }

    /// Residual of the transcendental equation of this pair's branch.
    pub fn residual(&self, a: f64, b: f64) -> f64 {
        branch_residual(self.branch, self.omega, a, b)
    }
}

fn branch_residual(branch: Branch, omega: f64, a: f64, b: f64) -> f64 {
    match branch {
        Branch::Cosine => 1.0 / b - omega * (omega * a).tan(),
        Branch::Sine => omega + (omega * a).tan() / b,
    }
}

fn check_geometry(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "half-width and correlation length must be positive (a={a}, b={b})"
        )));
    }
    Ok(())
}

/// The `n` smallest positive frequencies in ascending order, alternating between
/// the cosine and sine branch equations.
pub fn solve_omegas(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    check_geometry(a, b)?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one frequency".into()));
    }
    let step = PI / a;
    (1..=n)
        .map(|index| {
            let k = ((index - 1) / 2) as f64;
            let branch = Branch::of_index(index);
            // cosine roots sit in (k pi/a, (k+1/2) pi/a), sine roots in ((k+1/2) pi/a, (k+1) pi/a)
            let (lo, hi) = match branch {
                Branch::Cosine => (k * step, (k + 0.5) * step - ASYMPTOTE_MARGIN),
                Branch::Sine => ((k + 0.5) * step + ASYMPTOTE_MARGIN, (k + 1.0) * step),
            };
            let lo = if lo == 0.0 { ASYMPTOTE_MARGIN } else { lo };
            bisect(|w| branch_residual(branch, w, a, b), lo, hi)
                .ok_or(Error::Bracketing { root: index, lo, hi })
        })
        .collect()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// One-dimensional eigenpairs scaled by the process variance `sigma2`.
pub fn eigen_1d(a: f64, b: f64, sigma2: f64, n: usize) -> Result<Vec<Eigenpair1D>> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidArgument(format!("variance must be non-negative, got {sigma2}")));
    }
    let omegas = solve_omegas(a, b, n)?;
    Ok(omegas
        .into_iter()
        .enumerate()
        .map(|(i, omega)| {
            let branch = Branch::of_index(i + 1);
            let s = (2.0 * omega * a).sin() / (2.0 * omega);
            let norm = match branch {
                Branch::Cosine => (a + s).sqrt(),
                Branch::Sine => (a - s).sqrt(),
            };
            Eigenpair1D {
                omega,
                lambda: sigma2 * 2.0 * b / (1.0 + b * b * omega * omega),
                branch,
                norm,
            }
        })
        .collect())
}

/// One two-dimensional mode: `lambda = lambda_1d[ix] * lambda_1d[iy]` (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlMode {
    pub lambda: f64,
    pub ix: usize,
    pub iy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlExpansion2D {
    pub half_width: f64,
    pub corr_length: f64,
    pub sigma2: f64,
    pub modes: Vec<KlMode>,
    /// Every 1D pair referenced by `modes` (and possibly a few more).
    pub pairs_1d: Vec<Eigenpair1D>,
}

fn sorted_products(pairs: &[Eigenpair1D]) -> Vec<KlMode> {
    let mut modes: Vec<KlMode> = pairs
        .iter()
        .enumerate()
        .flat_map(|(x, px)| {
            pairs.iter().enumerate().map(move |(y, py)| KlMode {
                lambda: px.lambda * py.lambda,
                ix: x + 1,
                iy: y + 1,
            })
        })
        .collect();
    modes.sort_by(|p, q| {
        q.lambda
            .total_cmp(&p.lambda)
            .then_with(|| (p.ix, p.iy).cmp(&(q.ix, q.iy)))
    });
    modes
}

/// First `n_terms` two-dimensional eigenpairs, largest first, ties in `(ix, iy)` order.
pub fn eigen_2d(a: f64, b: f64, sigma2: f64, n_terms: usize) -> Result<KlExpansion2D> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("need at least one KL term".into()));
    }
    if !(sigma2 > 0.0) {
        // with zero variance every product ties at zero; keep the index order
        let m = (n_terms as f64).sqrt().ceil() as usize;
        let pairs = eigen_1d(a, b, sigma2, m)?;
        let mut modes = sorted_products(&pairs);
        modes.truncate(n_terms);
        return Ok(KlExpansion2D {
            half_width: a,
            corr_length: b,
            sigma2,
            modes,
            pairs_1d: pairs,
        });
    }
    let mut m = (n_terms as f64).sqrt().ceil() as usize + 1;
    loop {
        // one extra pair bounds every product with an index beyond m
        let pairs = eigen_1d(a, b, sigma2, m + 1)?;
        let mut modes = sorted_products(&pairs[..m]);
        if modes.len() >= n_terms {
            let cutoff = modes[n_terms - 1].lambda;
            if pairs[m].lambda * pairs[0].lambda < cutoff {
                modes.truncate(n_terms);
                return Ok(KlExpansion2D {
                    half_width: a,
                    corr_length: b,
                    sigma2,
                    modes,
                    pairs_1d: pairs,
                });
            }
        }
        m *= 2;
    }
}

/// `sum_{i<=k} lambda_i / sum_{i<=n} lambda_i`.
pub fn partial_sum_ratio(lambdas: &[f64], k: usize, n: usize) -> Result<f64> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty eigenvalue sequence".into()));
    }
    if k == 0 || k > n || n > lambdas.len() {
        return Err(Error::InvalidArgument(format!(
            "partial sum needs 1 <= k <= n <= {} (k={k}, n={n})",
            lambdas.len()
        )));
    }
    let head: f64 = lambdas[..k].iter().sum();
    let total: f64 = lambdas[..n].iter().sum();
    Ok(head / total)
}

impl KlExpansion2D {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// Covariance kernel value between two points of `[-a, a]^2`.
    pub fn covariance(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        self.sigma2 * (-((p[0] - q[0]).abs() + (p[1] - q[1]).abs()) / self.corr_length).exp()
    }

    /// `f_k(x, y) = g_ix(x) h_iy(y)` for the 1-based mode `k`.
    pub fn eigenfunction(&self, k: usize, point: [f64; 2]) -> Result<f64> {
        if k == 0 || k > self.modes.len() {
            return Err(Error::IndexOutOfRange {
                what: "KL modes (1-based)",
                index: k,
                len: self.modes.len(),
            });
        }
        let a = self.half_width;
        if point.iter().any(|c| !(c.abs() <= a + DOMAIN_TOL)) {
            return Err(Error::OutOfDomain {
                x: point[0],
                y: point[1],
                half_width: a,
            });
        }
        let mode = self.modes[k - 1];
        Ok(self.pairs_1d[mode.ix - 1].eval(point[0]) * self.pairs_1d[mode.iy - 1].eval(point[1]))
    }

    /// Maps a point of the unit square onto `[-a, a]^2`.
    pub fn map_unit_square(&self, p: [f64; 2]) -> [f64; 2] {
        let a = self.half_width;
        [2.0 * a * p[0] - a, 2.0 * a * p[1] - a]
    }

    /// Per-node Gaussian field modes `g_0` (constant `mean`) and
    /// `g_j = sqrt(lambda_j) f_j` for `j = 1..=n_modes`. Nodes are unit-square
    /// coordinates.
    pub fn gaussian_modes(&self, nodes: &[[f64; 2]], mean: f64, n_modes: usize) -> Result<GaussianModes> {
        if n_modes > self.modes.len() {
            return Err(Error::InvalidArgument(format!(
                "requested {n_modes} Gaussian modes but the expansion holds {}",
                self.modes.len()
            )));
        }
        let modes = (1..=n_modes)
            .map(|k| {
                let scale = self.modes[k - 1].lambda.sqrt();
                nodes
                    .iter()
                    .map(|&p| Ok(scale * self.eigenfunction(k, self.map_unit_square(p))?))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GaussianModes {
            mean: vec![mean; nodes.len()],
            modes,
        })
    }
}

/// Nodal values of a truncated Gaussian field `g = g_0 + sum_j g_j xi_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianModes {
    pub mean: Vec<f64>,
    /// `modes[j - 1][node] = g_j(node)`.
    pub modes: Vec<Vec<f64>>,
}

impl GaussianModes {
    /// Number of germ variables `L`.
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.mean.len()
    }

    /// `sum_j g_j(x)^2`, the nodal variance of the truncated field.
    pub fn variance(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_nodes()];
        for mode in &self.modes {
            for (o, g) in out.iter_mut().zip(mode) {
                *o += g * g;
            }
        }
        out
    }
}

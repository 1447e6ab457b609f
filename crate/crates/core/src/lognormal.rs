//! Polynomial chaos coefficients and exact samples of the lognormal field
//! `l(x, xi) = exp(g_0(x) + sum_j g_j(x) xi_j)`.
//!
//! Projection onto `Psi_i` factorises over dimensions, and for a standard normal
//! `xi`, `E[exp(g xi) He_m(xi)] = exp(g^2 / 2) g^m`. Hence
//! `l_i = l_0 prod_d g_d^{m_d} / m_d!` with `l_0 = exp(g_0 + sum_j g_j^2 / 2)`.

use crate::error::{Error, Result};
use crate::field::{FieldRole, StochasticField};
use crate::kle::GaussianModes;
use crate::pce::{factorial, PceBasis};

/// Input-coefficient field holding the chaos expansion of `exp(g)` on `basis`.
pub fn lognormal_pce(modes: &GaussianModes, basis: &PceBasis) -> Result<StochasticField> {
    if modes.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            what: "Gaussian modes vs chaos dimension",
            expected: basis.dim(),
            actual: modes.dim(),
        });
    }
    let variance = modes.variance();
    let mean: Vec<f64> = modes
        .mean
        .iter()
        .zip(&variance)
        .map(|(g0, v)| (g0 + 0.5 * v).exp())
        .collect();
    let coeffs = basis
        .terms()
        .iter()
        .map(|term| {
            let denom: f64 = term.orders().iter().map(|&m| factorial(m)).product();
            mean.iter()
                .enumerate()
                .map(|(node, l0)| {
                    let num: f64 = term
                        .orders()
                        .iter()
                        .zip(&modes.modes)
                        .map(|(&m, g)| g[node].powi(m as i32))
                        .product();
                    l0 * num / denom
                })
                .collect()
        })
        .collect();
    StochasticField::new(basis.clone(), coeffs, FieldRole::InputCoefficient)
}

/// Exact realisation `exp(g_0 + sum_j g_j xi_j)` at every node.
pub fn lognormal_sample(modes: &GaussianModes, xi: &[f64]) -> Result<Vec<f64>> {
    if xi.len() != modes.dim() {
        return Err(Error::DimensionMismatch {
            what: "germ vector",
            expected: modes.dim(),
            actual: xi.len(),
        });
    }
    let mut g = modes.mean.clone();
    for (mode, &x) in modes.modes.iter().zip(xi) {
        for (gi, m) in g.iter_mut().zip(mode) {
            *gi += m * x;
        }
    }
    Ok(g.into_iter().map(f64::exp).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pce::build_basis;

    fn modes_3d() -> GaussianModes {
        GaussianModes {
            mean: vec![0.1, -0.2],
            modes: vec![vec![0.2, 0.05], vec![-0.1, 0.15], vec![0.07, 0.0]],
        }
    }

    #[test]
    fn second_order_terms() {
        let modes = modes_3d();
        let basis = build_basis(3, 2).unwrap();
        let l = lognormal_pce(&modes, &basis).unwrap();
        for node in 0..2 {
            let g: Vec<f64> = modes.modes.iter().map(|m| m[node]).collect();
            let l0 = (modes.mean[node] + 0.5 * g.iter().map(|v| v * v).sum::<f64>()).exp();
            let want = [
                l0,
                l0 * g[0],
                l0 * g[1],
                l0 * g[2],
                l0 * g[0] * g[0] / 2.0,
                l0 * g[0] * g[1],
                l0 * g[1] * g[1] / 2.0,
                l0 * g[0] * g[2],
                l0 * g[2] * g[2] / 2.0,
                l0 * g[1] * g[2],
            ];
            for (j, w) in want.iter().enumerate() {
                assert!((l.coeff(j)[node] - w).abs() < 1e-15, "term {j}");
            }
        }
    }

    #[test]
    fn deterministic_limit() {
        let modes = GaussianModes {
            mean: vec![0.3, 0.0],
            modes: vec![vec![0.0; 2]; 2],
        };
        let basis = build_basis(2, 3).unwrap();
        let l = lognormal_pce(&modes, &basis).unwrap();
        assert!((l.coeff(0)[0] - 0.3f64.exp()).abs() < 1e-15);
        assert!(l.coeffs()[1..].iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn single_variable_series() {
        let sigma_g = 0.4;
        let modes = GaussianModes {
            mean: vec![0.0],
            modes: vec![vec![sigma_g]],
        };
        let basis = build_basis(1, 5).unwrap();
        let l = lognormal_pce(&modes, &basis).unwrap();
        let mu = (0.5 * sigma_g * sigma_g).exp();
        for i in 0..=5 {
            let want = mu * sigma_g.powi(i as i32) / factorial(i);
            assert!((l.coeff(i)[0] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn samples() {
        let modes = modes_3d();
        let at_zero = lognormal_sample(&modes, &[0.0; 3]).unwrap();
        assert_eq!(at_zero, vec![0.1f64.exp(), (-0.2f64).exp()]);
        let s = lognormal_sample(&modes, &[3.0, -2.0, 10.0]).unwrap();
        assert!(s.iter().all(|&v| v > 0.0));
        assert!(lognormal_sample(&modes, &[0.0; 2]).is_err());
        assert!(lognormal_pce(&modes, &build_basis(2, 2).unwrap()).is_err());
    }
}

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use ssfem::{build_basis, eigen_2d, lognormal_pce, lognormal_sample, structured_mesh, GaussianModes};

fn reference_modes(n: usize, dim: usize) -> GaussianModes {
    let mesh = structured_mesh(n, n).unwrap();
    let kle = eigen_2d(0.5, 1.0, 0.09, dim).unwrap();
    kle.gaussian_modes(mesh.nodes(), 0.0, dim).unwrap()
}

#[test]
fn monte_carlo_mean_matches_l0() {
    let modes = reference_modes(8, 3);
    let l = lognormal_pce(&modes, &build_basis(3, 2).unwrap()).unwrap();
    let probes = [0usize, 10, 40, 41, 70];
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let samples = 100_000;
    let mut acc = vec![0.0; probes.len()];
    for _ in 0..samples {
        let xi: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = lognormal_sample(&modes, &xi).unwrap();
        for (a, &p) in acc.iter_mut().zip(&probes) {
            *a += s[p];
        }
    }
    for (a, &p) in acc.iter().zip(&probes) {
        let mc = a / samples as f64;
        assert!((mc - l.coeff(0)[p]).abs() / l.coeff(0)[p] < 0.01, "node {p}: {mc} vs {}", l.coeff(0)[p]);
    }
}

#[test]
fn second_moment_of_truncated_series() {
    let modes = reference_modes(8, 3);
    let basis = build_basis(3, 4).unwrap();
    let l = lognormal_pce(&modes, &basis).unwrap();
    let var = modes.variance();
    for node in 0..modes.num_nodes() {
        let pce: f64 = l
            .coeffs()
            .iter()
            .zip(basis.variances())
            .map(|(row, v)| row[node] * row[node] * v)
            .sum();
        let exact = (2.0 * modes.mean[node] + 2.0 * var[node]).exp();
        assert!((pce - exact).abs() / exact < 1e-4, "node {node}");
    }
}

#[test]
fn expansion_approximates_samples() {
    let modes = reference_modes(6, 3);
    let basis = build_basis(3, 3).unwrap();
    let l = lognormal_pce(&modes, &basis).unwrap();
    for xi in [[1.0, -1.0, 0.5], [0.0, 0.0, 0.0], [-0.7, 0.9, -1.0], [0.3, 0.3, 0.3]] {
        let approx = l.evaluate(&xi).unwrap();
        let exact = lognormal_sample(&modes, &xi).unwrap();
        for (a, e) in approx.iter().zip(&exact) {
            assert!((a - e).abs() / e < 1e-3);
        }
    }
}

#[test]
fn even_index_terms_are_positive() {
    let modes = reference_modes(6, 3);
    let basis = build_basis(3, 4).unwrap();
    let l = lognormal_pce(&modes, &basis).unwrap();
    for (j, t) in basis.terms().iter().enumerate() {
        if t.orders().iter().all(|m| m % 2 == 0) {
            assert!(l.coeff(j).iter().all(|&v| v >= 0.0), "term {t}");
        }
    }
}

#![allow(dead_code)]

//! Oracles shared by the integration tests. None of them reuse the crate's own
//! quadrature or recurrences.

/// `E[f(xi)]` for a standard normal `xi` by the trapezoid rule on `[-14, 14]`.
/// Spectrally accurate for smooth integrands of polynomial growth.
pub fn normal_expect(f: impl Fn(f64) -> f64) -> f64 {
    let h = 0.005;
    let n = (28.0 / h) as usize;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    (0..=n)
        .map(|i| {
            let x = -14.0 + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * f(x) * (-0.5 * x * x).exp()
        })
        .sum::<f64>()
        * h
        * norm
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `He_n(x) = n! sum_m (-1)^m x^(n-2m) / (m! (n-2m)! 2^m)`.
pub fn hermite_explicit(n: usize, x: f64) -> f64 {
    (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * x.powi((n - 2 * m) as i32) / (factorial(m) * factorial(n - 2 * m) * 2f64.powi(m as i32))
        })
        .sum::<f64>()
        * factorial(n)
}

/// `E[xi^k]` for a standard normal.
pub fn normal_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}

/// `<He_a He_b He_c> = a! b! c! / ((s-a)! (s-b)! (s-c)!)`, `s = (a+b+c)/2`.
pub fn triple_moment(a: usize, b: usize, c: usize) -> f64 {
    let t = a + b + c;
    if t % 2 == 1 || a > b + c || b > a + c || c > a + b {
        return 0.0;
    }
    let s = t / 2;
    factorial(a) * factorial(b) * factorial(c) / (factorial(s - a) * factorial(s - b) * factorial(s - c))
}

/// Composite Simpson rule with `panels` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..panels {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Centre value of `-laplace(u) = 1` on the unit square with `u = 0` on the boundary.
pub fn poisson_center_value() -> f64 {
    let pi = std::f64::consts::PI;
    let mut s = 0.125;
    for k in (1..200).step_by(2) {
        let kf = k as f64;
        let sign = if (k - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
        s -= 4.0 / (pi.powi(3) * kf.powi(3)) * sign / (kf * pi / 2.0).cosh();
    }
    s
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let n: f64 = a.iter().map(|x| x * x).sum();
    (d / n).sqrt()
}

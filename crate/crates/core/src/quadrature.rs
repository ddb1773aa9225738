//! Gauss–Legendre and composite Simpson rules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[a, b]`, Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 { 0.0 } else { n as f64 * (x * p1 - p0) / (x * x - 1.0) };
    (p, dp)
}

/// Composite Simpson weight of sample `k` out of `n_intervals + 1` samples
/// spaced by `h`. `n_intervals` must be even.
#[inline]
pub fn simpson_weight(k: usize, n_intervals: usize, h: f64) -> f64 {
    let w = if k == 0 || k == n_intervals {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    };
    w * h / 3.0
}

/// Composite Simpson rule over uniformly spaced samples; `None` when the
/// number of intervals is odd.
pub fn simpson(samples: &[f64], h: f64) -> Option<f64> {
    let n = samples.len().checked_sub(1)?;
    if n == 0 || n % 2 != 0 {
        return None;
    }
    Some(samples.iter().enumerate().map(|(k, v)| simpson_weight(k, n, h) * v).sum())
}

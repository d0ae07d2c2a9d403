//! Gauss–Legendre nodes and weights.

use std::f64::consts::PI;

use crate::{Error, Result};

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes (ascending) and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", value: 0.0, reason: "need at least one node" });
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1e-3) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "Gauss-Legendre node",
                iterations: 100,
                detail: format!("root {i} of P_{n}"),
            });
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// Maps a rule on `[-1, 1]` to `[a, b]`, appending to `nodes`/`weights`.
pub(crate) fn push_mapped(
    x: &[f64],
    w: &[f64],
    a: f64,
    b: f64,
    nodes: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    nodes.extend(x.iter().map(|&xi| c + h * xi));
    weights.extend(w.iter().map(|&wi| h * wi));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n).unwrap();
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let even = 2 * (n - 1);
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(even as i32)).sum();
            assert!((s - 2.0 / (even as f64 + 1.0)).abs() < 1e-13, "n={n}");
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn large_rule_is_sorted_and_positive() {
        let (x, w) = gauss_legendre(2048).unwrap();
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!(w.iter().all(|&w| w > 0.0));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }
}

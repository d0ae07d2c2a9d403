//! Dense real symmetric eigenvalues.
//!
//! Production path: Householder reduction to tridiagonal form followed by
//! implicit QL sweeps. Cyclic Jacobi rotations are kept as an independent
//! cross-check.

use rayon::prelude::*;

use crate::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds `a_ij = f(i, j)` for `j ≤ i` and mirrors it.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if j <= i { f(i, j) } else { f(j, i) };
            }
        });
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut a = self.data.clone();
        let (mut d, mut e) = tridiagonalize(&mut a, self.n);
        tridiagonal_ql(&mut d, &mut e)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// All eigenvalues in ascending order by cyclic Jacobi rotations.
    pub fn eigenvalues_jacobi(&self, max_sweeps: usize) -> Result<Vec<f64>> {
        jacobi(self.data.clone(), self.n, max_sweeps)
    }
}

/// Householder reduction; returns the diagonal and the sub-diagonal
/// (`e[i]` couples `i` and `i + 1`, `e[n − 1] = 0`). `a` is overwritten.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let s = k + 1;
        let norm = (s..n).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        d[k] = a[k * n + k];
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = a[s * n + k];
        let alpha = -norm.copysign(x0);
        for i in s..n {
            v[i] = a[i * n + k];
        }
        v[s] -= alpha;
        let vtv: f64 = (s..n).map(|i| v[i] * v[i]).sum();
        e[k] = alpha;
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;
        // p = β A₂₂ v
        let vs = &v[s..n];
        p[s..n].par_iter_mut().enumerate().for_each(|(r, pi)| {
            let row = &a[(s + r) * n + s..(s + r + 1) * n];
            *pi = beta * row.iter().zip(vs).map(|(x, y)| x * y).sum::<f64>();
        });
        let ptv: f64 = (s..n).map(|i| p[i] * v[i]).sum();
        let half = 0.5 * beta * ptv;
        for i in s..n {
            p[i] -= half * v[i];
        }
        // A₂₂ ← A₂₂ − v wᵀ − w vᵀ
        let (vs, ws) = (&v[s..n], &p[s..n]);
        a[s * n..].par_chunks_mut(n).enumerate().for_each(|(r, row)| {
            let (vi, wi) = (vs[r], ws[r]);
            for ((x, &vj), &wj) in row[s..].iter_mut().zip(vs).zip(ws) {
                *x -= vi * wj + wi * vj;
            }
        });
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        d[n - 1] = a[n * n - 1];
    }
    (d, e)
}

const QL_MAX_ITERATIONS: usize = 60;

/// Implicit QL with the shift taken from the trailing 2×2 block; `d` ends up
/// holding the eigenvalues (unsorted).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // off-diagonals below ε‖T‖ are dropped: the eigenvalues are only
    // accurate to that level anyway, and clusters of tiny eigenvalues would
    // otherwise never satisfy a purely relative test
    let norm = d.iter().zip(e.iter()).map(|(d, e)| d.abs() + 2.0 * e.abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITERATIONS {
                return Err(Error::NoConvergence {
                    what: "tridiagonal QL",
                    iterations: iter,
                    detail: format!("eigenvalue {l} of {n}, off-diagonal {:e}", e[l]),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
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
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn jacobi(mut a: Vec<f64>, n: usize, max_sweeps: usize) -> Result<Vec<f64>> {
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob.max(f64::MIN_POSITIVE) {
            let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            d.sort_by(f64::total_cmp);
            return Ok(d);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence {
        what: "cyclic Jacobi",
        iterations: max_sweeps,
        detail: format!("{n}x{n} matrix still has significant off-diagonal mass"),
    })
}

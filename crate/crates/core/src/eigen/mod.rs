//! The backflow eigenvalue problem.
//!
//! Over a time window of length `τ` the largest probability that can flow
//! back into `x < 0` is the largest eigenvalue `λ` of
//!
//! ```text
//! (1/π) ∫₀^∞ sin[u² − v² − ξ(u − v)]/(u − v) φ(v) dv = −λ φ(u)
//! ```
//!
//! in dimensionless momenta. Without a force `ξ = 0` and the spectrum is a
//! universal constant. The integral is discretized with Gauss–Legendre
//! nodes on `[0, u_max]` and the symmetrized matrix `√(wᵢwⱼ)K(uᵢ, uⱼ)`
//! is diagonalized.
//!
//! Truncating at `u_max` loses a tail that decays only like `1/u_max`, so
//! [`max_backflow`] raises the cutoff together with the node count and
//! extrapolates `λ_max` in `1/u_max`.

mod gauss;
mod symmetric;

use std::f64::consts::PI;

pub use gauss::gauss_legendre;
pub use symmetric::SymmetricMatrix;

use crate::params::{Environment, PhysicalConstants};
use crate::special_fn::{uptau, uptau_lag};
use crate::{Error, Result};

/// Slack on `|λ| ≤ 1` before a spectrum is rejected.
pub const EIGENVALUE_BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Free,
    Forced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Ignored for [`KernelKind::Free`].
    pub xi: f64,
}

impl KernelSpec {
    pub fn free() -> Self {
        Self { kind: KernelKind::Free, xi: 0.0 }
    }

    pub fn forced(xi: f64) -> Self {
        Self { kind: KernelKind::Forced, xi }
    }

    pub fn effective_xi(&self) -> f64 {
        match self.kind {
            KernelKind::Free => 0.0,
            KernelKind::Forced => self.xi,
        }
    }
}

#[inline]
fn kernel(u: f64, v: f64, xi: f64) -> f64 {
    let d = u - v;
    if d.abs() < 1e-8 * (1.0 + u + v) {
        (u + v - xi) / PI
    } else {
        (d * (u + v - xi)).sin() / (PI * d)
    }
}

/// `(1/π) sin[(u − v)(u + v − ξ)]/(u − v)`, with the removable singularity
/// at `u = v` replaced by its limit `(2u − ξ)/π`.
pub fn kernel_value(spec: KernelSpec, u: f64, v: f64) -> Result<f64> {
    for (name, x) in [("u", u), ("v", v)] {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidParameter { name, value: x, reason: "must be finite and >= 0" });
        }
    }
    if !spec.xi.is_finite() {
        return Err(Error::InvalidParameter { name: "xi", value: spec.xi, reason: "must be finite" });
    }
    Ok(kernel(u, v, spec.effective_xi()))
}

/// Dimensionless force parameter of a backflow window of duration `tau`
/// under friction, `g·√(m/(ħ·uptau(γ,τ)))·(uptau(γ,τ) − τ)/(2γ)`.
/// Tends to `−(g/2)√(m/ħ)τ^{3/2}` without friction.
pub fn xi(constants: &PhysicalConstants, env: &Environment, tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter { name: "tau", value: tau, reason: "must be finite and > 0" });
    }
    if env.g() == 0.0 {
        return Ok(0.0);
    }
    let up = uptau(env.gamma(), tau);
    Ok(env.g() * (constants.mass() / (constants.hbar_eff() * up)).sqrt() * uptau_lag(env.gamma(), tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// One Gauss–Legendre rule over the whole interval.
    Global,
    /// Equal panels, each carrying an `order`-point rule.
    Panels { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub n: usize,
    pub u_max: f64,
    pub rule: Rule,
}

impl QuadratureSpec {
    pub fn new(n: usize, u_max: f64, rule: Rule) -> Result<Self> {
        let q = Self { n, u_max, rule };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::InvalidParameter { name: "n", value: self.n as f64, reason: "need at least 8 nodes" });
        }
        if !(self.u_max.is_finite() && self.u_max > 0.0) {
            return Err(Error::InvalidParameter { name: "u_max", value: self.u_max, reason: "must be finite and > 0" });
        }
        if let Rule::Panels { order } = self.rule {
            if order == 0 || !self.n.is_multiple_of(order) {
                return Err(Error::InvalidParameter {
                    name: "order",
                    value: order as f64,
                    reason: "panel order must be positive and divide n",
                });
            }
        }
        Ok(())
    }

    /// Nodes and weights on `[0, u_max]`.
    pub fn nodes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let mut nodes = Vec::with_capacity(self.n);
        let mut weights = Vec::with_capacity(self.n);
        match self.rule {
            Rule::Global => {
                let (x, w) = gauss_legendre(self.n)?;
                gauss::push_mapped(&x, &w, 0.0, self.u_max, &mut nodes, &mut weights);
            }
            Rule::Panels { order } => {
                let (x, w) = gauss_legendre(order)?;
                let panels = self.n / order;
                let h = self.u_max / panels as f64;
                for p in 0..panels {
                    gauss::push_mapped(&x, &w, p as f64 * h, (p + 1) as f64 * h, &mut nodes, &mut weights);
                }
            }
        }
        Ok((nodes, weights))
    }

    /// The same rule with about half the nodes.
    fn halved(&self) -> Self {
        let n = match self.rule {
            Rule::Global => self.n / 2,
            Rule::Panels { order } => (self.n / 2 / order).max(1) * order,
        };
        Self { n: n.max(8), ..*self }
    }
}

/// Backflow eigenvalues `λ = −μ` (ascending) of one discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpectrum {
    pub lambdas: Vec<f64>,
    pub lambda_max: f64,
    pub n_used: usize,
    pub u_max: f64,
    /// Change of `lambda_max` against the previous, coarser solve.
    pub convergence_estimate: f64,
}

/// Sorted backflow eigenvalues of one discretization. Fails with
/// [`Error::SpectrumOutOfBounds`] when the grid is too coarse for the
/// oscillation of the kernel; about `u_max²` nodes are needed.
pub fn nystrom_lambdas(spec: KernelSpec, quad: QuadratureSpec) -> Result<Vec<f64>> {
    let lambdas = lambdas_unchecked(spec, quad)?;
    if let Some(&bad) = lambdas.iter().find(|l| l.abs() > 1.0 + EIGENVALUE_BOUND_SLACK) {
        return Err(Error::SpectrumOutOfBounds { lambda: bad });
    }
    Ok(lambdas)
}

fn lambdas_unchecked(spec: KernelSpec, quad: QuadratureSpec) -> Result<Vec<f64>> {
    let (u, w) = quad.nodes()?;
    let xi = spec.effective_xi();
    let sw: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
    let m = SymmetricMatrix::from_fn(u.len(), |i, j| sw[i] * sw[j] * kernel(u[i], u[j], xi));
    let mu = m.eigenvalues()?;
    Ok(mu.iter().rev().map(|m| -m).collect())
}

/// Spectrum at `quad`, with the convergence estimate taken against the
/// same rule at half the nodes. Only the fine spectrum is held to the
/// `|λ| ≤ 1` bound.
pub fn nystrom_spectrum(spec: KernelSpec, quad: QuadratureSpec) -> Result<KernelSpectrum> {
    let lambdas = nystrom_lambdas(spec, quad)?;
    let coarse = lambdas_unchecked(spec, quad.halved())?;
    let lambda_max = *lambdas.last().expect("n >= 8");
    Ok(KernelSpectrum {
        convergence_estimate: (lambda_max - coarse.last().expect("n >= 8")).abs(),
        lambdas,
        lambda_max,
        n_used: quad.n,
        u_max: quad.u_max,
    })
}

/// Refinement schedule of [`max_backflow`]: step `k` uses
/// `n = start_n·2^k` nodes on `[0, √n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementOptions {
    pub start_n: usize,
    pub max_n: usize,
    pub rule: Rule,
}

impl Default for RefinementOptions {
    fn default() -> Self {
        Self { start_n: 64, max_n: 4096, rule: Rule::Global }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementStep {
    pub n: usize,
    pub u_max: f64,
    pub lambda_max_raw: f64,
    /// Extrapolation through this and the two previous cutoffs.
    pub extrapolated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackflowEstimate {
    /// Cutoff-extrapolated largest eigenvalue.
    pub lambda_max: f64,
    /// Largest eigenvalue of the finest truncated problem.
    pub lambda_max_raw: f64,
    /// Change of the extrapolant over the last step.
    pub convergence_estimate: f64,
    /// Full spectrum of the finest truncated problem.
    pub spectrum: KernelSpectrum,
    pub history: Vec<RefinementStep>,
}

/// Value at `h = 0` of the quadratic through three points.
fn extrapolate_to_zero(h: [f64; 3], y: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let mut l = 1.0;
            for j in 0..3 {
                if j != i {
                    l *= h[j] / (h[j] - h[i]);
                }
            }
            y[i] * l
        })
        .sum()
}

/// Largest backflow eigenvalue, refined until successive extrapolations
/// differ by at most `tolerance`.
pub fn max_backflow(spec: KernelSpec, tolerance: f64) -> Result<BackflowEstimate> {
    max_backflow_with(spec, tolerance, &RefinementOptions::default())
}

pub fn max_backflow_with(spec: KernelSpec, tolerance: f64, opts: &RefinementOptions) -> Result<BackflowEstimate> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidParameter { name: "tolerance", value: tolerance, reason: "must be finite and > 0" });
    }
    if opts.start_n < 8 || opts.max_n < opts.start_n {
        return Err(Error::InvalidParameter {
            name: "max_n",
            value: opts.max_n as f64,
            reason: "need 8 <= start_n <= max_n",
        });
    }
    let mut history: Vec<RefinementStep> = Vec::new();
    let mut n = opts.start_n;
    while n <= opts.max_n {
        let u_max = (n as f64).sqrt();
        let quad = QuadratureSpec::new(n, u_max, opts.rule)?;
        let lambdas = nystrom_lambdas(spec, quad)?;
        let raw = *lambdas.last().expect("n >= 8");
        let k = history.len();
        let extrapolated = (k >= 2).then(|| {
            let s = [&history[k - 2], &history[k - 1]];
            extrapolate_to_zero(
                [1.0 / s[0].u_max, 1.0 / s[1].u_max, 1.0 / u_max],
                [s[0].lambda_max_raw, s[1].lambda_max_raw, raw],
            )
        });
        let previous_raw = history.last().map(|s| s.lambda_max_raw);
        let previous_extrapolated = history.last().and_then(|s| s.extrapolated);
        history.push(RefinementStep { n, u_max, lambda_max_raw: raw, extrapolated });
        let spectrum = KernelSpectrum {
            convergence_estimate: previous_raw.map_or(f64::INFINITY, |p| (raw - p).abs()),
            lambdas,
            lambda_max: raw,
            n_used: n,
            u_max,
        };
        if let (Some(e), Some(p)) = (extrapolated, previous_extrapolated) {
            let change = (e - p).abs();
            if change <= tolerance {
                return Ok(BackflowEstimate {
                    lambda_max: e,
                    lambda_max_raw: raw,
                    convergence_estimate: change,
                    spectrum,
                    history,
                });
            }
        }
        n *= 2;
    }
    let detail = match history.last() {
        Some(s) => format!(
            "n reached {} (u_max {:.3}); last extrapolations {:?}",
            s.n,
            s.u_max,
            history.iter().rev().take(2).map(|s| s.extrapolated).collect::<Vec<_>>()
        ),
        None => "no refinement step fitted in the node budget".to_string(),
    };
    Err(Error::NoConvergence { what: "backflow eigenvalue refinement", iterations: history.len(), detail })
}

//! Caldirola–Kanai evolution of a two-Gaussian superposition.
//!
//! Everything is closed form. The friction enters only through the
//! effective elapsed time `τ = uptau(γ, t)`, so without a force the whole
//! state at time `t` equals the frictionless state at time `τ`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::params::{Environment, GaussianSuperposition, PhysicalConstants};
use crate::special_fn::{
    drift_factor, erfc, erfc_complex_scaled, relaxation, uptau, TWO_OVER_SQRT_PI,
};
use crate::{Dynamics, Error, Result};

/// Slack allowed on a probability before it is reported as out of range.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Complex width, density width, centers and classical actions at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkState {
    pub t: f64,
    /// `s_t = (ħ + 2iσ_p²τ/m)/(2σ_p)`
    pub s_t: Complex64,
    /// `σ_t = |s_t|`
    pub sigma_t: f64,
    /// `dσ_t/dt`
    pub sigma_rate: f64,
    pub center_a: f64,
    pub center_b: f64,
    /// `dq/dt` for each component.
    pub velocity_a: f64,
    pub velocity_b: f64,
    /// `p₀²τ/(2m)`; `None` under a force, where the action is not modelled.
    pub action_a: Option<f64>,
    pub action_b: Option<f64>,
}

/// Exponent offset `d₁` and complex center `d₂` of the interference term of
/// the density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTermCoeffs {
    pub d1: Complex64,
    pub d2: Complex64,
}

fn check_time(env: &Environment, t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter { name: "t", value: t, reason: "must be finite" });
    }
    if t < 0.0 && env.g() != 0.0 {
        return Err(Error::NegativeTime {
            t,
            reason: "negative times are only supported without a force",
        });
    }
    Ok(())
}

/// Center and velocity of a packet with kick momentum `p0`.
pub(crate) fn trajectory(c: &PhysicalConstants, env: &Environment, p0: f64, t: f64) -> (f64, f64) {
    let (gamma, g, m) = (env.gamma(), env.g(), c.mass());
    let tau = uptau(gamma, t);
    let mut q = p0 / m * tau;
    let mut v = p0 / m * relaxation(gamma, t);
    if g != 0.0 {
        q += g * drift_factor(gamma, t);
        v += g * tau;
    }
    (q, v)
}

pub fn ck_state(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<CkState> {
    check_time(env, t)?;
    let (m, hbar, sp) = (constants.mass(), constants.hbar_eff(), sup.sigma_p());
    let tau = uptau(env.gamma(), t);
    let s_t = Complex64::new(hbar, 2.0 * sp * sp * tau / m) / (2.0 * sp);
    let sigma_t = s_t.norm();
    let sigma_rate = sp * sp * tau * relaxation(env.gamma(), t) / (m * m * sigma_t);
    let (center_a, velocity_a) = trajectory(constants, env, sup.p0a(), t);
    let (center_b, velocity_b) = trajectory(constants, env, sup.p0b(), t);
    let action = |p0: f64| (env.g() == 0.0).then(|| p0 * p0 * tau / (2.0 * m));
    Ok(CkState {
        t,
        s_t,
        sigma_t,
        sigma_rate,
        center_a,
        center_b,
        velocity_a,
        velocity_b,
        action_a: action(sup.p0a()),
        action_b: action(sup.p0b()),
    })
}

/// Probability of a negative momentum outcome. Conserved by the free
/// frictionless motion and the lower bound that backflow competes with.
pub fn prob_negative_momentum(sup: &GaussianSuperposition) -> f64 {
    let sp = sup.sigma_p();
    let k = SQRT_2 * sp;
    let (pa, pb, alpha) = (sup.p0a(), sup.p0b(), sup.alpha());
    let cross = 2.0 * alpha * (-sup.overlap_exponent()).exp() * sup.theta().cos() * erfc((pa + pb) / (2.0 * k));
    0.5 * sup.norm_sq() * (erfc(pa / k) + alpha * alpha * erfc(pb / k) + cross)
}

/// Width, centers and their rates: all that the probability of staying on
/// the left depends on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Spread {
    pub w: f64,
    pub w_rate: f64,
    pub q: [f64; 2],
    pub v: [f64; 2],
}

impl Spread {
    fn from_ck(s: &CkState) -> Self {
        Self {
            w: s.sigma_t,
            w_rate: s.sigma_rate,
            q: [s.center_a, s.center_b],
            v: [s.velocity_a, s.velocity_b],
        }
    }
}

/// Imaginary part of the interference center, `ħ(p₀a − p₀b)/(4σ_p²)`.
pub(crate) fn cross_center_imag(hbar: f64, sup: &GaussianSuperposition) -> f64 {
    hbar * (sup.p0a() - sup.p0b()) / (4.0 * sup.sigma_p().powi(2))
}

/// `P(x < 0)` for Gaussian densities of common width `w` centered at `q`.
pub(crate) fn prob_left_spread(hbar: f64, sup: &GaussianSuperposition, sp: &Spread) -> Result<f64> {
    let k = SQRT_2 * sp.w;
    let alpha = sup.alpha();
    let mut sum = erfc(sp.q[0] / k) + alpha * alpha * erfc(sp.q[1] / k);
    if alpha != 0.0 {
        let c = Complex64::new(0.5 * (sp.q[0] + sp.q[1]), cross_center_imag(hbar, sup)) / k;
        let s = erfc_complex_scaled(c, -sup.overlap_exponent())?;
        let (sin, cos) = sup.theta().sin_cos();
        sum += 2.0 * alpha * (cos * s.re + sin * s.im);
    }
    Ok(0.5 * sup.norm_sq() * sum)
}

/// Analytic `dP/dt` for the same densities.
pub(crate) fn prob_left_rate_spread(hbar: f64, sup: &GaussianSuperposition, sp: &Spread) -> f64 {
    let k = SQRT_2 * sp.w;
    let arg_rate = |q: f64, v: f64| (v * sp.w - q * sp.w_rate) / (SQRT_2 * sp.w * sp.w);
    let diag = |q: f64, v: f64| {
        let a = q / k;
        (-a * a).exp() * arg_rate(q, v)
    };
    let alpha = sup.alpha();
    let mut sum = diag(sp.q[0], sp.v[0]) + alpha * alpha * diag(sp.q[1], sp.v[1]);
    if alpha != 0.0 {
        let center = Complex64::new(0.5 * (sp.q[0] + sp.q[1]), cross_center_imag(hbar, sup));
        let c = center / k;
        let c_rate = (Complex64::from(0.5 * (sp.v[0] + sp.v[1]) * sp.w) - center * sp.w_rate)
            / (SQRT_2 * sp.w * sp.w);
        // the real part of this exponent is never positive because w ≥ ħ/(2σ_p)
        let e = (-sup.overlap_exponent() - c * c - Complex64::new(0.0, sup.theta())).exp();
        sum += 2.0 * alpha * (e * c_rate).re;
    }
    -0.5 * sup.norm_sq() * TWO_OVER_SQRT_PI * sum
}

pub(crate) fn check_probability(p: f64, t: f64) -> Result<f64> {
    if p.is_finite() && (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        Ok(p)
    } else {
        Err(Error::ProbabilityOutOfRange { value: p, t })
    }
}

/// Probability of finding the particle at `x < 0`. Under a force the centers
/// follow the forced trajectories.
pub fn prob_left_ck(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<f64> {
    let s = ck_state(constants, env, sup, t)?;
    let p = prob_left_spread(constants.hbar_eff(), sup, &Spread::from_ck(&s))?;
    check_probability(p, t)
}

/// `dP/dt` of [`prob_left_ck`], differentiated analytically.
pub fn prob_left_rate_ck(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<f64> {
    let s = ck_state(constants, env, sup, t)?;
    Ok(prob_left_rate_spread(constants.hbar_eff(), sup, &Spread::from_ck(&s)))
}

/// One normalized component `ψ_k(x, t)` and its `x`-derivative.
fn component(hbar: f64, sigma_p: f64, s: &CkState, center: f64, p0: f64, action: f64, x: f64) -> (Complex64, Complex64) {
    let d = x - center;
    let exponent = Complex64::new(0.0, (p0 * d + action) / hbar) - sigma_p * d * d / (2.0 * hbar * s.s_t);
    let psi = (2.0 * PI).powf(-0.25) / s.s_t.sqrt() * exponent.exp();
    let dpsi = (Complex64::new(0.0, p0 / hbar) - sigma_p * d / (hbar * s.s_t)) * psi;
    (psi, dpsi)
}

fn psi_and_derivative(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    x: f64,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    let s = ck_state(constants, env, sup, t)?;
    let (Some(act_a), Some(act_b)) = (s.action_a, s.action_b) else {
        return Err(Error::ForcedWaveFunction);
    };
    let (hbar, sp) = (constants.hbar_eff(), sup.sigma_p());
    let (pa, dpa) = component(hbar, sp, &s, s.center_a, sup.p0a(), act_a, x);
    let (pb, dpb) = component(hbar, sp, &s, s.center_b, sup.p0b(), act_b, x);
    let w = Complex64::from_polar(sup.alpha(), sup.theta());
    let n = sup.norm();
    Ok((n * (pa + w * pb), n * (dpa + w * dpb)))
}

/// `ψ(x, t) = N(ψ_a + αe^{iθ}ψ_b)`. Only defined without a force.
pub fn psi_ck(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    x: f64,
    t: f64,
) -> Result<Complex64> {
    psi_and_derivative(constants, env, sup, x, t).map(|(psi, _)| psi)
}

pub fn cross_term_coeffs(
    constants: &PhysicalConstants,
    sup: &GaussianSuperposition,
    state: &CkState,
) -> CrossTermCoeffs {
    CrossTermCoeffs {
        d1: Complex64::new(-sup.overlap_exponent(), -sup.theta()),
        d2: Complex64::new(
            0.5 * (state.center_a + state.center_b),
            cross_center_imag(constants.hbar_eff(), sup),
        ),
    }
}

/// Probability density from the four-Gaussian closed form. Under a force the
/// centers are the forced trajectories, consistent with [`prob_left_ck`].
pub fn density_ck(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    x: f64,
    t: f64,
) -> Result<f64> {
    let s = ck_state(constants, env, sup, t)?;
    let sig = s.sigma_t;
    let gauss = |c: f64| (-(x - c).powi(2) / (2.0 * sig * sig)).exp();
    let alpha = sup.alpha();
    let mut sum = gauss(s.center_a) + alpha * alpha * gauss(s.center_b);
    if alpha != 0.0 {
        let cc = cross_term_coeffs(constants, sup, &s);
        let e = cc.d1 - (x - cc.d2).powi(2) / (2.0 * sig * sig);
        sum += 2.0 * alpha * e.exp().re;
    }
    Ok(sup.norm_sq() * sum / ((2.0 * PI).sqrt() * sig))
}

/// Probability current through the origin, `(ħ/m)Im{ψ*∂ₓψ}e^{−2γt}`.
///
/// Under a force the wave function is not available; the current is then
/// `−dP/dt` from [`prob_left_rate_ck`], which is what the continuity
/// equation gives for the probability on the left.
pub fn current_origin_ck(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<f64> {
    if env.g() != 0.0 {
        return prob_left_rate_ck(constants, env, sup, t).map(|r| -r);
    }
    let (psi, dpsi) = psi_and_derivative(constants, env, sup, 0.0, t)?;
    Ok(constants.hbar_eff() / constants.mass() * (psi.conj() * dpsi).im * relaxation(env.gamma(), t))
}

/// Caldirola–Kanai evolution of one superposition in one environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkModel {
    pub constants: PhysicalConstants,
    pub env: Environment,
    pub state: GaussianSuperposition,
}

impl CkModel {
    pub fn new(constants: PhysicalConstants, env: Environment, state: GaussianSuperposition) -> Self {
        Self { constants, env, state }
    }
}

impl Dynamics for CkModel {
    fn prob_left(&self, t: f64) -> Result<f64> {
        prob_left_ck(&self.constants, &self.env, &self.state, t)
    }

    fn current_origin(&self, t: f64) -> Result<f64> {
        current_origin_ck(&self.constants, &self.env, &self.state, t)
    }

    fn earliest_time(&self) -> f64 {
        if self.env.g() == 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }
}

//! Caldeira–Leggett evolution in the high-temperature limit.
//!
//! The reduced density matrix of each pair of components stays Gaussian in
//! the center coordinate `R = (x + x')/2` with a width `w_t` that grows with
//! the diffusion coefficient `D = 2mγk_BT`. Everything is written in terms
//! of `R` and the relative coordinate `r = x − x'`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::ck::{
    check_probability, prob_left_rate_spread, prob_left_spread, trajectory,
    Spread,
};
use crate::params::{Environment, GaussianSuperposition, PhysicalConstants};
use crate::special_fn::{relaxation, thermal_width_factor, uptau};
use crate::{Dynamics, Error, Result};

/// Width of the density and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClWidth {
    pub w_t: f64,
    pub w_rate: f64,
}

/// Ordered pair of components `(k, l)`: the term evolving `ψ_k(x)ψ_l*(x')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentPair {
    AA,
    AB,
    BA,
    BB,
}

impl ComponentPair {
    pub const ALL: [ComponentPair; 4] = [Self::AA, Self::AB, Self::BA, Self::BB];

    fn indices(self) -> (usize, usize) {
        match self {
            Self::AA => (0, 0),
            Self::AB => (0, 1),
            Self::BA => (1, 0),
            Self::BB => (1, 1),
        }
    }

    /// Weight of this pair in `ρ/N²`.
    pub fn weight(self, sup: &GaussianSuperposition) -> Complex64 {
        let (a, th) = (sup.alpha(), sup.theta());
        match self {
            Self::AA => Complex64::new(1.0, 0.0),
            Self::AB => Complex64::from_polar(a, -th),
            Self::BA => Complex64::from_polar(a, th),
            Self::BB => Complex64::new(a * a, 0.0),
        }
    }
}

/// `a₀(r) = a0_r0 + da0_dr·r + a0_rr·r²` and `a₁(r) = a1_r0 + da1_dr·r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClCrossTerm {
    pub a0_r0: Complex64,
    pub da0_dr: Complex64,
    pub a0_rr: Complex64,
    pub a1_r0: Complex64,
    pub da1_dr: Complex64,
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() {
        return Err(Error::InvalidParameter { name: "t", value: t, reason: "must be finite" });
    }
    if t < 0.0 {
        return Err(Error::NegativeTime {
            t,
            reason: "the width becomes imaginary for t < 0 once diffusion dominates",
        });
    }
    Ok(())
}

pub fn cl_width(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<ClWidth> {
    check_time(t)?;
    let (m, hbar, sp, gamma) = (constants.mass(), constants.hbar_eff(), sup.sigma_p(), env.gamma());
    let d = env.diffusion(constants);
    let tau = uptau(gamma, t);
    let mut w2 = (hbar / (2.0 * sp)).powi(2) + (sp * tau / m).powi(2);
    if d != 0.0 {
        w2 += d * thermal_width_factor(gamma, t)? / (4.0 * m * m);
    }
    let w_t = w2.sqrt();
    let w_rate = (sp * sp * tau * relaxation(gamma, t) + d * tau * tau) / (m * m * w_t);
    Ok(ClWidth { w_t, w_rate })
}

pub fn cl_cross_coeffs(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    which: ComponentPair,
    t: f64,
) -> Result<ClCrossTerm> {
    check_time(t)?;
    let (m, hbar, sp, gamma) = (constants.mass(), constants.hbar_eff(), sup.sigma_p(), env.gamma());
    let d = env.diffusion(constants);
    let p = [sup.p0a(), sup.p0b()];
    let (k, l) = which.indices();
    let (pk, pl) = (p[k], p[l]);
    let qk = trajectory(constants, env, pk, t).0;
    let ql = trajectory(constants, env, pl, t).0;
    let tau = uptau(gamma, t);
    let rel = relaxation(gamma, t);

    let a0_rr = -(sp * sp * rel * rel / (2.0 * hbar * hbar) - d * uptau(2.0 * gamma, t) / (hbar * hbar));
    let da0 = rel * (pk + pl) / (2.0 * hbar) + m * env.g() / hbar * tau;
    let da1 = sp * sp * rel * tau / (m * hbar) + d * tau * tau / (hbar * m);
    let a1_im = hbar * (pk - pl) / (4.0 * sp * sp);
    Ok(ClCrossTerm {
        a0_r0: Complex64::new(-(pk - pl).powi(2) / (8.0 * sp * sp), 0.0),
        da0_dr: Complex64::new(0.0, da0),
        a0_rr: Complex64::new(a0_rr, 0.0),
        a1_r0: Complex64::new(0.5 * (qk + ql), a1_im),
        da1_dr: Complex64::new(0.0, da1),
    })
}

/// `ρ_kl(R, r, t)` for one ordered pair, without the `N²` and pair weight.
pub fn cl_pair_density(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    which: ComponentPair,
    big_r: f64,
    r: f64,
    t: f64,
) -> Result<Complex64> {
    let w = cl_width(constants, env, sup, t)?.w_t;
    let c = cl_cross_coeffs(constants, env, sup, which, t)?;
    Ok(pair_density(&c, w, big_r, r))
}

fn pair_density(c: &ClCrossTerm, w: f64, big_r: f64, r: f64) -> Complex64 {
    let a0 = c.a0_r0 + c.da0_dr * r + c.a0_rr * r * r;
    let a1 = c.a1_r0 + c.da1_dr * r;
    (a0 - (big_r - a1).powi(2) / (2.0 * w * w)).exp() / ((2.0 * PI).sqrt() * w)
}

/// Diagonal of the density matrix, the probability density at `x`.
pub fn rho_diag_cl(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    x: f64,
    t: f64,
) -> Result<f64> {
    let w = cl_width(constants, env, sup, t)?.w_t;
    let mut sum = Complex64::new(0.0, 0.0);
    for pair in ComponentPair::ALL {
        let c = cl_cross_coeffs(constants, env, sup, pair, t)?;
        sum += pair.weight(sup) * pair_density(&c, w, x, 0.0);
    }
    Ok(sup.norm_sq() * sum.re)
}

fn spread(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<Spread> {
    let width = cl_width(constants, env, sup, t)?;
    let (qa, va) = trajectory(constants, env, sup.p0a(), t);
    let (qb, vb) = trajectory(constants, env, sup.p0b(), t);
    Ok(Spread { w: width.w_t, w_rate: width.w_rate, q: [qa, qb], v: [va, vb] })
}

pub fn prob_left_cl(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<f64> {
    let sp = spread(constants, env, sup, t)?;
    check_probability(prob_left_spread(constants.hbar_eff(), sup, &sp)?, t)
}

/// `dP/dt` of [`prob_left_cl`], differentiated analytically.
pub fn prob_left_rate_cl(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<f64> {
    let sp = spread(constants, env, sup, t)?;
    Ok(prob_left_rate_spread(constants.hbar_eff(), sup, &sp))
}

/// Weighted sum of the four pair currents at `x` before the imaginary part
/// is taken, without the `ħ/m` prefactor.
pub fn current_sum_cl(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    x: f64,
    t: f64,
) -> Result<[Complex64; 4]> {
    let w = cl_width(constants, env, sup, t)?.w_t;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (slot, pair) in out.iter_mut().zip(ComponentPair::ALL) {
        let c = cl_cross_coeffs(constants, env, sup, pair, t)?;
        let factor = c.da0_dr - (x - c.a1_r0) / (2.0 * w * w) * (1.0 - 2.0 * c.da1_dr);
        *slot = sup.norm_sq() * pair.weight(sup) * factor * pair_density(&c, w, x, 0.0);
    }
    Ok(out)
}

/// Probability current through the origin. The pair weights are complex,
/// so the imaginary part is taken after summing the four pairs.
pub fn current_origin_cl(
    constants: &PhysicalConstants,
    env: &Environment,
    sup: &GaussianSuperposition,
    t: f64,
) -> Result<f64> {
    let terms = current_sum_cl(constants, env, sup, 0.0, t)?;
    let total: Complex64 = terms.iter().sum();
    Ok(constants.hbar_eff() / constants.mass() * total.im)
}

/// Caldeira–Leggett evolution of one superposition in one environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClModel {
    pub constants: PhysicalConstants,
    pub env: Environment,
    pub state: GaussianSuperposition,
}

impl ClModel {
    pub fn new(constants: PhysicalConstants, env: Environment, state: GaussianSuperposition) -> Self {
        Self { constants, env, state }
    }
}

impl Dynamics for ClModel {
    fn prob_left(&self, t: f64) -> Result<f64> {
        prob_left_cl(&self.constants, &self.env, &self.state, t)
    }

    fn current_origin(&self, t: f64) -> Result<f64> {
        current_origin_cl(&self.constants, &self.env, &self.state, t)
    }

    fn earliest_time(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ck;
    use approx::assert_relative_eq;

    fn setup(gamma: f64, kt: f64) -> (PhysicalConstants, Environment, GaussianSuperposition) {
        (
            PhysicalConstants::default(),
            Environment::new(gamma, kt, 0.0).unwrap(),
            GaussianSuperposition::reference(),
        )
    }

    #[test]
    fn width_at_zero_and_without_diffusion() {
        let (c, env, sup) = setup(0.1, 10.0);
        assert_eq!(cl_width(&c, &env, &sup, 0.0).unwrap().w_t, 10.0);
        let (c, env0, sup) = setup(0.1, 0.0);
        for &t in &[0.5, 5.0, 50.0] {
            let w = cl_width(&c, &env0, &sup, t).unwrap().w_t;
            let s = ck::ck_state(&c, &env0, &sup, t).unwrap().sigma_t;
            assert_eq!(w, s);
            assert!(cl_width(&c, &env, &sup, t).unwrap().w_t > s);
        }
    }

    #[test]
    fn cross_coefficients_of_reference_state() {
        let (c, env, sup) = setup(0.1, 1.0);
        let ab = cl_cross_coeffs(&c, &env, &sup, ComponentPair::AB, 3.0).unwrap();
        assert_relative_eq!(ab.a0_r0.re, -60.5, max_relative = 1e-14);
        assert_relative_eq!(ab.a1_r0.im, 110.0, max_relative = 1e-14);
        let aa = cl_cross_coeffs(&c, &env, &sup, ComponentPair::AA, 3.0).unwrap();
        assert_eq!(aa.a0_r0, Complex64::new(0.0, 0.0));
        assert_eq!(aa.a1_r0.im, 0.0);
    }

    #[test]
    fn pair_terms_conjugate() {
        let (c, env, sup) = setup(0.1, 5.0);
        for &t in &[0.0, 0.7, 4.0] {
            let [_, ab, ba, _] = current_sum_cl(&c, &env, &sup, 0.0, t).unwrap();
            // the ba term is the conjugate of ab with its current factor reversed
            let rab = cl_pair_density(&c, &env, &sup, ComponentPair::AB, 0.3, 0.0, t).unwrap();
            let rba = cl_pair_density(&c, &env, &sup, ComponentPair::BA, 0.3, 0.0, t).unwrap();
            assert_relative_eq!(rab.re, rba.re, max_relative = 1e-12);
            assert_relative_eq!(rab.im, -rba.im, max_relative = 1e-12);
            assert!((ab + ba).im.is_finite());
        }
    }

    #[test]
    fn negative_time_rejected() {
        let (c, env, sup) = setup(0.1, 1.0);
        assert!(matches!(prob_left_cl(&c, &env, &sup, -0.1), Err(Error::NegativeTime { .. })));
        assert!(current_origin_cl(&c, &env, &sup, -0.1).is_err());
    }

    #[test]
    fn current_is_minus_rate() {
        let (c, env, sup) = setup(0.1, 5.0);
        for &t in &[0.0, 0.2, 1.5, 12.0] {
            let j = current_origin_cl(&c, &env, &sup, t).unwrap();
            let r = prob_left_rate_cl(&c, &env, &sup, t).unwrap();
            assert!((j + r).abs() < 1e-12, "t={t}: {j} vs {r}");
        }
    }
}

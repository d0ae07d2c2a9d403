//! Physical parameter records shared by both dynamical frameworks.

use crate::{Error, Result};

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value, reason: "must be finite and > 0" })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value, reason: "must be finite and >= 0" })
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value, reason: "must be finite" })
    }
}

/// Mass, Planck constant and the classicality parameter `ε`.
///
/// Every formula uses the scaled constant `ħ√ε` ([`hbar_eff`](Self::hbar_eff));
/// `ε = 1` is ordinary quantum mechanics and `ε → 0` the classical
/// Schrödinger equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    mass: f64,
    hbar: f64,
    epsilon: f64,
}

impl PhysicalConstants {
    pub fn new(mass: f64, hbar: f64, epsilon: f64) -> Result<Self> {
        positive("m", mass)?;
        positive("hbar", hbar)?;
        if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self { mass, hbar, epsilon })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `ħ√ε`, exactly `ħ` at `ε = 1`.
    pub fn hbar_eff(&self) -> f64 {
        if self.epsilon == 1.0 {
            self.hbar
        } else {
            self.hbar * self.epsilon.sqrt()
        }
    }
}

impl Default for PhysicalConstants {
    /// Units with `ħ = m = 1`, fully quantum.
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, epsilon: 1.0 }
    }
}

/// Friction rate `γ`, thermal energy `k_B T` and the acceleration `g` of the
/// constant force `m·g` (potential `−m g x`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Environment {
    gamma: f64,
    kt: f64,
    g: f64,
}

impl Environment {
    pub fn new(gamma: f64, kt: f64, g: f64) -> Result<Self> {
        non_negative("gamma", gamma)?;
        non_negative("kT", kt)?;
        finite("g", g)?;
        Ok(Self { gamma, kt, g })
    }

    /// Friction only, no temperature, no force.
    pub fn friction(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0, 0.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Damping constant `η = 2mγ`.
    pub fn damping(&self, constants: &PhysicalConstants) -> f64 {
        2.0 * constants.mass() * self.gamma
    }

    /// Diffusion coefficient `D = 2mγk_BT`.
    pub fn diffusion(&self, constants: &PhysicalConstants) -> f64 {
        2.0 * constants.mass() * self.gamma * self.kt
    }
}

/// One Gaussian in momentum space: width `σ_p` and kick momentum `p₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    sigma_p: f64,
    p0: f64,
}

impl GaussianComponent {
    pub fn new(sigma_p: f64, p0: f64) -> Result<Self> {
        positive("sigma_p", sigma_p)?;
        finite("p0", p0)?;
        Ok(Self { sigma_p, p0 })
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }
}

/// `N(ψ_a + α e^{iθ} ψ_b)` with both components sharing one momentum width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSuperposition {
    comp_a: GaussianComponent,
    comp_b: GaussianComponent,
    alpha: f64,
    theta: f64,
    norm_sq: f64,
}

impl GaussianSuperposition {
    pub fn new(
        comp_a: GaussianComponent,
        comp_b: GaussianComponent,
        alpha: f64,
        theta: f64,
    ) -> Result<Self> {
        if comp_a.sigma_p != comp_b.sigma_p {
            return Err(Error::InvalidParameter {
                name: "sigma_p",
                value: comp_b.sigma_p,
                reason: "both components must share the same momentum width",
            });
        }
        non_negative("alpha", alpha)?;
        finite("theta", theta)?;
        let overlap = (-(comp_a.p0 - comp_b.p0).powi(2) / (8.0 * comp_a.sigma_p.powi(2))).exp();
        let inverse_norm_sq = 1.0 + alpha * alpha + 2.0 * alpha * overlap * theta.cos();
        if inverse_norm_sq <= 1e-14 * (1.0 + alpha * alpha) {
            return Err(Error::DegenerateSuperposition { inverse_norm_sq });
        }
        Ok(Self { comp_a, comp_b, alpha, theta, norm_sq: 1.0 / inverse_norm_sq })
    }

    /// Convenience constructor from raw numbers.
    pub fn from_parts(sigma_p: f64, p0a: f64, p0b: f64, alpha: f64, theta: f64) -> Result<Self> {
        Self::new(
            GaussianComponent::new(sigma_p, p0a)?,
            GaussianComponent::new(sigma_p, p0b)?,
            alpha,
            theta,
        )
    }

    /// A single Gaussian with kick momentum `p0` (`α = 0`).
    pub fn single(sigma_p: f64, p0: f64) -> Result<Self> {
        Self::from_parts(sigma_p, p0, p0, 0.0, 0.0)
    }

    /// The maximal-backflow state of the non-dissipative problem:
    /// `σ_p = 0.05`, `p₀a = 1.4`, `p₀b = 0.3`, `α = 1.9`, `θ = π`.
    pub fn reference() -> Self {
        Self::from_parts(0.05, 1.4, 0.3, 1.9, std::f64::consts::PI)
            .expect("reference state is valid")
    }

    pub fn comp_a(&self) -> GaussianComponent {
        self.comp_a
    }

    pub fn comp_b(&self) -> GaussianComponent {
        self.comp_b
    }

    pub fn sigma_p(&self) -> f64 {
        self.comp_a.sigma_p
    }

    pub fn p0a(&self) -> f64 {
        self.comp_a.p0
    }

    pub fn p0b(&self) -> f64 {
        self.comp_b.p0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `N²`
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `N`
    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// `(p₀a − p₀b)²/(8σ_p²)`, minus the log of the momentum overlap factor.
    pub fn overlap_exponent(&self) -> f64 {
        (self.p0a() - self.p0b()).powi(2) / (8.0 * self.sigma_p().powi(2))
    }
}

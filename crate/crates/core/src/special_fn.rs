//! Scalar building blocks: the Faddeeva function, complex `erfc`, and stable
//! forms of the friction-dependent exponential differences.
//!
//! `w(z)` is evaluated in the closed upper half-plane with two regions:
//!
//! * large `|z|` (or `Im z > 7`): the Laplace continued fraction
//!   `w(z) = (i/√π) / (z − ½/(z − 1/(z − 3/2/(z − …))))`;
//! * everything else: the Zaghloul–Ali exponentially convergent sum, which
//!   needs the real scaled complementary error function `erfcx(y)` for
//!   `0 ≤ y ≤ 7`.
//!
//! The lower half-plane uses the reflection identity
//! `w(z) = 2·exp(−z²) − w(−z)`. When `exp(−z²)` leaves the `f64` range the
//! result saturates component-wise to `±f64::MAX` and is reported through
//! [`SpecialFnError::Overflow`].

use num_complex::Complex64;
use thiserror::Error;

/// `1/√π`
const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Largest argument for which `exp` stays finite.
const EXP_ARG_MAX: f64 = 709.78;

/// `|2γt|` below which [`uptau`] switches to its Taylor polynomial.
pub const UPTAU_SERIES_THRESHOLD: f64 = 1e-3;

/// `|2γt|` below which the higher-order relaxation factors
/// ([`thermal_width_factor`], [`drift_factor`]) use power series.
pub const RELAXATION_SERIES_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("non-finite argument {re} + {im}i")]
    NonFinite { re: f64, im: f64 },
    /// The exact value is not representable; `saturated` carries the sign
    /// pattern of the true value with magnitudes clamped to `f64::MAX`.
    #[error("result overflows f64 (saturated to {saturated})")]
    Overflow { saturated: Complex64 },
}

/// Real complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Real scaled complementary error function `exp(y²)·erfc(y)` for
/// `0 ≤ y ≤ 7`, the only range the sum formula needs.
fn erfcx_small(y: f64) -> f64 {
    debug_assert!((0.0..=7.5).contains(&y));
    (y * y).exp() * libm::erfc(y)
}

fn check_finite(z: Complex64) -> Result<(), SpecialFnError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(SpecialFnError::NonFinite { re: z.re, im: z.im })
    }
}

/// `exp(e)` for a complex exponent, flagging overflow instead of returning
/// infinities.
fn checked_exp(e: Complex64) -> Result<Complex64, SpecialFnError> {
    if e.re > EXP_ARG_MAX {
        let (s, c) = e.im.sin_cos();
        let clamp = |v: f64| if v == 0.0 { 0.0 } else { f64::MAX.copysign(v) };
        return Err(SpecialFnError::Overflow {
            saturated: Complex64::new(clamp(c), clamp(s)),
        });
    }
    Ok(e.exp())
}

/// Faddeeva function `w(z) = exp(−z²)·erfc(−iz)`.
pub fn faddeeva(z: Complex64) -> Result<Complex64, SpecialFnError> {
    check_finite(z)?;
    if z.im >= 0.0 {
        return Ok(w_upper(z));
    }
    // w(z) = 2 exp(-z²) - w(-z), with Re(-z²) = (y - x)(y + x)
    let (x, y) = (z.re, z.im);
    let e = Complex64::new((y - x) * (y + x), -2.0 * x * y);
    Ok(checked_exp(e)? * 2.0 - w_upper(-z))
}

/// Complex complementary error function.
pub fn erfc_complex(z: Complex64) -> Result<Complex64, SpecialFnError> {
    erfc_complex_scaled(z, 0.0)
}

/// `exp(log_scale)·erfc(z)`, combining the scale with the `exp(−z²)` factor
/// before exponentiating so that huge `erfc` values multiplied by tiny
/// prefactors stay representable.
pub fn erfc_complex_scaled(z: Complex64, log_scale: f64) -> Result<Complex64, SpecialFnError> {
    check_finite(z)?;
    let (x, y) = (z.re, z.im);
    // log_scale - z²
    let e = Complex64::new(log_scale + (y - x) * (y + x), -2.0 * x * y);
    if x >= 0.0 {
        // erfc(z) = exp(-z²) w(iz), Im(iz) = x ≥ 0
        Ok(checked_exp(e)? * w_upper(Complex64::new(-y, x)))
    } else {
        // erfc(z) = 2 - erfc(-z) = 2 - exp(-z²) w(-iz), Im(-iz) = -x > 0
        let two = checked_exp(Complex64::new(log_scale, 0.0))? * 2.0;
        Ok(two - checked_exp(e)? * w_upper(Complex64::new(y, -x)))
    }
}

#[inline]
fn sinc(x: f64, sin_x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        sin_x / x
    }
}

#[inline]
fn sinh_taylor(x: f64) -> f64 {
    x * (1.0 + x * x * (1.0 / 6.0 + x * x / 120.0))
}

/// Faddeeva function for `Im z ≥ 0`, finite `z`.
fn w_upper(z: Complex64) -> Complex64 {
    // Sum-formula constants tuned for full double precision:
    // a = π/√(−ln(ε/2)), c = 2a/π.
    const A: f64 = 0.518_321_480_430_085_9;
    const C: f64 = 0.329_973_702_884_629_07;
    const A2: f64 = 0.268_657_157_075_235_95;
    const RELERR: f64 = f64::EPSILON;

    let x = z.re.abs();
    let y = z.im;
    debug_assert!(y >= 0.0);

    if y > 7.0 || (x > 6.0 && (y > 0.1 || (x > 8.0 && y > 1e-10) || x > 28.0)) {
        let xs = z.re;
        if x + y > 4000.0 {
            if x + y > 1e7 {
                // w ≈ i/(√π z), scaled to avoid overflow
                return if x > y {
                    let yax = y / xs;
                    let denom = INV_SQRT_PI / (xs + yax * y);
                    Complex64::new(denom * yax, denom)
                } else {
                    let xya = xs / y;
                    let denom = INV_SQRT_PI / (xya * xs + y);
                    Complex64::new(denom, denom * xya)
                };
            }
            // w ≈ (i/√π) z / (z² − ½)
            let dr = xs * xs - y * y - 0.5;
            let di = 2.0 * xs * y;
            let denom = INV_SQRT_PI / (dr * dr + di * di);
            return Complex64::new(denom * (xs * di - y * dr), denom * (xs * dr + y * di));
        }
        // number of continued-fraction levels (Poppe–Wijers style fit)
        let nu = (3.9 + 11.398 / (0.08254 * x + 0.1421 * y + 0.2023)).floor();
        let (mut wr, mut wi) = (xs, y);
        let mut k = 0.5 * (nu - 1.0);
        while k > 0.4 {
            let denom = k / (wr * wr + wi * wi);
            wr = xs - wr * denom;
            wi = y + wi * denom;
            k -= 0.5;
        }
        let denom = INV_SQRT_PI / (wr * wr + wi * wi);
        return Complex64::new(denom * wi, denom * wr);
    }

    let (mut sum1, mut sum2, mut sum3, mut sum4, mut sum5) = (0.0, 0.0, 0.0, 0.0, 0.0);

    if x < 10.0 {
        let mut prod2ax = 1.0;
        let mut prodm2ax = 1.0;
        let expx2;
        let exp2ax = (2.0 * A * x).exp();
        let expm2ax = 1.0 / exp2ax;
        if x < 5e-4 {
            let x2 = x * x;
            expx2 = 1.0 - x2 * (1.0 - 0.5 * x2);
            let mut n = 1.0_f64;
            loop {
                let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y * y);
                prod2ax *= exp2ax;
                prodm2ax *= expm2ax;
                sum1 += coef;
                sum2 += coef * prodm2ax;
                sum3 += coef * prod2ax;
                // sum5 - sum4 accumulated directly
                sum5 += coef * (2.0 * A) * n * sinh_taylor((2.0 * A) * n * x);
                if coef * prod2ax < RELERR * sum3 {
                    break;
                }
                n += 1.0;
            }
        } else {
            expx2 = (-x * x).exp();
            let mut n = 1.0_f64;
            loop {
                let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y * y);
                prod2ax *= exp2ax;
                prodm2ax *= expm2ax;
                sum1 += coef;
                sum2 += coef * prodm2ax;
                sum4 += coef * prodm2ax * (A * n);
                sum3 += coef * prod2ax;
                sum5 += coef * prod2ax * (A * n);
                if coef * prod2ax * (A * n) < RELERR * sum5 {
                    break;
                }
                n += 1.0;
            }
        }

        let expx2erfcxy = expx2 * erfcx_small(y);
        let head = if y > 5.0 {
            // imaginary contributions cancel against the tail sums
            let sinxy = (x * y).sin();
            Complex64::new(
                (expx2erfcxy - C * y * sum1) * (2.0 * x * y).cos()
                    + (C * x * expx2) * sinxy * sinc(x * y, sinxy),
                0.0,
            )
        } else {
            let xs = z.re;
            let sinxy = (xs * y).sin();
            let sin2xy = (2.0 * xs * y).sin();
            let cos2xy = (2.0 * xs * y).cos();
            let coef1 = expx2erfcxy - C * y * sum1;
            let coef2 = C * xs * expx2;
            Complex64::new(
                coef1 * cos2xy + coef2 * sinxy * sinc(xs * y, sinxy),
                coef2 * sinc(2.0 * xs * y, sin2xy) - coef1 * sin2xy,
            )
        };
        return head
            + Complex64::new(0.5 * C * y * (sum2 + sum3), (0.5 * C * (sum5 - sum4)).copysign(z.re));
    }

    // 10 ≤ x ≤ 28 with y ≤ 1e-10: only sum3 and sum5 survive; sum outwards
    // from the dominant index n0.
    let head = Complex64::new((-x * x).exp(), 0.0);
    let n0 = (x / A + 0.5).floor();
    let dx = A * n0 - x;
    sum3 = (-dx * dx).exp() / (A2 * n0 * n0 + y * y);
    sum5 = A * n0 * sum3;
    let exp1 = (4.0 * A * dx).exp();
    let mut exp1dn = 1.0;
    let mut dn = 1.0_f64;
    let finish = |sum3: f64, sum5: f64| {
        head + Complex64::new(0.5 * C * y * (sum2 + sum3), (0.5 * C * (sum5 - sum4)).copysign(z.re))
    };
    while dn < n0 {
        let np = n0 + dn;
        let nm = n0 - dn;
        let mut tp = (-(A * dn + dx).powi(2)).exp();
        exp1dn *= exp1;
        let mut tm = tp * exp1dn;
        tp /= A2 * np * np + y * y;
        tm /= A2 * nm * nm + y * y;
        sum3 += tp + tm;
        sum5 += A * (np * tp + nm * tm);
        if A * (np * tp + nm * tm) < RELERR * sum5 {
            return finish(sum3, sum5);
        }
        dn += 1.0;
    }
    loop {
        let np = n0 + dn;
        dn += 1.0;
        let tp = (-(A * dn + dx).powi(2)).exp() / (A2 * np * np + y * y);
        sum3 += tp;
        sum5 += A * np * tp;
        if A * np * tp < RELERR * sum5 {
            return finish(sum3, sum5);
        }
    }
}

/// Effective elapsed time of Caldirola–Kanai free motion,
/// `(1 − e^{−2γt})/(2γ)`; equals `t` at `γ = 0`. Negative `t` is allowed.
pub fn uptau(gamma: f64, t: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    let x = 2.0 * gamma * t;
    if x.abs() < UPTAU_SERIES_THRESHOLD {
        // t · Σ_{k=0}^{5} (−x)^k/(k+1)!
        t * (1.0 - x / 2.0 * (1.0 - x / 3.0 * (1.0 - x / 4.0 * (1.0 - x / 5.0 * (1.0 - x / 6.0)))))
    } else {
        -(-x).exp_m1() / (2.0 * gamma)
    }
}

/// `(4γt + 4e^{−2γt} − 3 − e^{−4γt})/(2γ³)`, the thermal spreading factor of
/// the Caldeira–Leggett width; tends to `8t³/3` as `γ → 0`.
pub fn thermal_width_factor(gamma: f64, t: f64) -> Result<f64, crate::Error> {
    if t < 0.0 {
        return Err(crate::Error::NegativeTime {
            t,
            reason: "the thermal width term turns the density width imaginary for t < 0",
        });
    }
    debug_assert!(gamma >= 0.0);
    let x = 2.0 * gamma * t;
    if x < RELAXATION_SERIES_THRESHOLD {
        // 4t³ Σ_{n≥3} (−1)^n (4 − 2^n) x^{n−3}/n!
        let mut sum = 0.0f64;
        let mut fact = 6.0f64; // n!
        let mut xpow = 1.0; // x^{n-3}
        let mut two_n = 8.0; // 2^n
        for n in 3..40 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * (4.0 - two_n) * xpow / fact;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            xpow *= x;
            two_n *= 2.0;
            fact *= (n + 1) as f64;
        }
        Ok(4.0 * t.powi(3) * sum)
    } else {
        Ok((2.0 * x - 3.0 + 4.0 * (-x).exp() - (-2.0 * x).exp()) / (2.0 * gamma.powi(3)))
    }
}

/// `(2γt − 1 + e^{−2γt})/(4γ²)`, the displacement produced by a unit
/// acceleration under friction; tends to `t²/2` as `γ → 0`.
pub fn drift_factor(gamma: f64, t: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    let x = 2.0 * gamma * t;
    if x.abs() < RELAXATION_SERIES_THRESHOLD {
        // t² Σ_{n≥2} (−x)^{n−2}/n!
        let mut sum = 0.0f64;
        let mut term = 0.5f64;
        let mut n = 2.0;
        while n < 40.0 {
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            n += 1.0;
            term *= -x / n;
        }
        t * t * sum
    } else {
        (x - 1.0 + (-x).exp()) / (4.0 * gamma * gamma)
    }
}

/// `(uptau(γ,τ) − τ)/(2γ)`; tends to `−τ²/2` as `γ → 0`.
pub(crate) fn uptau_lag(gamma: f64, tau: f64) -> f64 {
    -drift_factor(gamma, tau)
}

/// `e^{−2γt}`
#[inline]
pub fn relaxation(gamma: f64, t: f64) -> f64 {
    (-2.0 * gamma * t).exp()
}

/// `2/√π`
pub(crate) const TWO_OVER_SQRT_PI: f64 = 2.0 * INV_SQRT_PI;

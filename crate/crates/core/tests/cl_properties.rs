//! Caldeira–Leggett observables: reduction to the wave-function picture
//! without diffusion, normalization, continuity and Hermiticity.

use std::f64::consts::PI;

use backflow_core::cl::{
    cl_pair_density, cl_width, current_origin_cl, current_sum_cl, prob_left_cl, rho_diag_cl,
    ComponentPair,
};
use backflow_core::quadrature::integrate;
use backflow_core::{ck, Complex64, Environment, GaussianSuperposition, PhysicalConstants};
use proptest::prelude::*;

fn unit() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn reference() -> GaussianSuperposition {
    GaussianSuperposition::reference()
}

#[test]
fn zero_diffusion_reproduces_wave_function_picture() {
    let (c, sup) = (unit(), reference());
    for env in [
        Environment::new(0.1, 0.0, 0.0).unwrap(),
        Environment::new(0.3, 0.0, 0.0).unwrap(),
        Environment::new(0.1, 0.0, 0.1).unwrap(),
    ] {
        for k in 0..=100 {
            let t = k as f64 * 0.5;
            let p_cl = prob_left_cl(&c, &env, &sup, t).unwrap();
            let p_ck = ck::prob_left_ck(&c, &env, &sup, t).unwrap();
            assert!((p_cl - p_ck).abs() <= 1e-10, "P at t={t}");
            let j_cl = current_origin_cl(&c, &env, &sup, t).unwrap();
            let j_ck = ck::current_origin_ck(&c, &env, &sup, t).unwrap();
            assert!((j_cl - j_ck).abs() <= 1e-10, "j at t={t}: {j_cl} vs {j_ck}");
            for x in [-30.0, 0.0, 0.9 * t, 1.4 * t + 5.0] {
                let r_cl = rho_diag_cl(&c, &env, &sup, x, t).unwrap();
                let r_ck = ck::density_ck(&c, &env, &sup, x, t).unwrap();
                assert!((r_cl - r_ck).abs() <= 1e-10 * r_ck.abs().max(1e-3), "ρ at x={x}, t={t}");
            }
        }
    }
}

#[test]
fn single_gaussian_peak() {
    let c = unit();
    let sup = GaussianSuperposition::single(0.05, 1.4).unwrap();
    let env = Environment::new(0.1, 5.0, 0.0).unwrap();
    let t = 3.0;
    let w = cl_width(&c, &env, &sup, t).unwrap().w_t;
    let xt = 1.4 * backflow_core::special_fn::uptau(0.1, t);
    let rho = rho_diag_cl(&c, &env, &sup, xt, t).unwrap();
    assert!((rho - 1.0 / ((2.0 * PI).sqrt() * w)).abs() < 1e-15);
}

#[test]
fn density_is_normalized() {
    let (c, sup) = (unit(), reference());
    for kt in [1.0, 10.0] {
        let env = Environment::new(0.1, kt, 0.0).unwrap();
        for t in [0.0, 1.0, 10.0] {
            let w = cl_width(&c, &env, &sup, t).unwrap().w_t;
            let hi = 1.4 * t + 14.0 * w;
            let n = integrate(|x| rho_diag_cl(&c, &env, &sup, x, t), -14.0 * w, hi, 1e-11, 4000).unwrap().value;
            assert!((n - 1.0).abs() <= 1e-8, "kT={kt} t={t}: {n}");
        }
    }
}

#[test]
fn closed_form_probability_matches_density_quadrature() {
    let (c, sup) = (unit(), reference());
    for env in [Environment::new(0.1, 1.0, 0.0).unwrap(), Environment::new(0.1, 10.0, 0.03).unwrap()] {
        for t in [0.0, 0.3, 2.0, 15.0] {
            let w = cl_width(&c, &env, &sup, t).unwrap().w_t;
            let quad = integrate(|x| rho_diag_cl(&c, &env, &sup, x, t), -14.0 * w, 0.0, 1e-12, 4000).unwrap().value;
            let p = prob_left_cl(&c, &env, &sup, t).unwrap();
            assert!((p - quad).abs() < 1e-10, "t={t}: {p} vs {quad}");
        }
    }
}

#[test]
fn continuity_against_finite_differences() {
    let (c, sup) = (unit(), reference());
    let h = 1e-4;
    let mut cases = vec![];
    for kt in [1.0, 2.0, 5.0, 10.0] {
        cases.push((0.1, kt, 0.0));
        cases.push((0.5, kt, 0.0));
    }
    for kt in [1.0, 10.0] {
        for g in [0.01, 0.02, 0.03] {
            cases.push((0.1, kt, g));
        }
    }
    for (gamma, kt, g) in cases {
        let env = Environment::new(gamma, kt, g).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=2500 {
            let t = k as f64 * 2e-2;
            let t_lo = (t - h).max(0.0);
            let dpdt = (prob_left_cl(&c, &env, &sup, t + h).unwrap() - prob_left_cl(&c, &env, &sup, t_lo).unwrap())
                / (t + h - t_lo);
            worst = worst.max((current_origin_cl(&c, &env, &sup, t).unwrap() + dpdt).abs());
        }
        assert!(worst <= 1e-6, "γ={gamma} kT={kt} g={g}: {worst}");
    }
}

#[test]
fn width_exceeds_wave_function_width_and_grows() {
    let (c, sup) = (unit(), reference());
    let env = Environment::new(0.1, 2.0, 0.0).unwrap();
    let mut prev = cl_width(&c, &env, &sup, 0.0).unwrap().w_t;
    assert_eq!(prev, 10.0);
    for k in 1..=1000 {
        let t = k as f64 * 0.05;
        let w = cl_width(&c, &env, &sup, t).unwrap().w_t;
        let s = ck::ck_state(&c, &env, &sup, t).unwrap().sigma_t;
        assert!(w > s && w > prev, "t={t}");
        prev = w;
    }
}

/// The `x`-derivative of the density matrix at `x' = x`: its imaginary part
/// is the current, its real part half the slope of the density.
#[test]
fn pre_sum_real_part_is_half_density_slope() {
    let (c, sup) = (unit(), reference());
    let env = Environment::new(0.1, 5.0, 0.0).unwrap();
    for (x, t) in [(0.0, 0.5), (-3.0, 2.0), (8.0, 6.0)] {
        let total: Complex64 = current_sum_cl(&c, &env, &sup, x, t).unwrap().iter().sum();
        let h = 1e-2;
        let rho = |y: f64| rho_diag_cl(&c, &env, &sup, y, t).unwrap();
        let slope = (rho(x - 2.0 * h) - 8.0 * rho(x - h) + 8.0 * rho(x + h) - rho(x + 2.0 * h)) / (12.0 * h);
        assert!((total.re - 0.5 * slope).abs() < 1e-9, "{} vs {}", total.re, 0.5 * slope);
    }
}

fn components() -> (GaussianSuperposition, GaussianSuperposition) {
    (GaussianSuperposition::single(0.05, 1.4).unwrap(), GaussianSuperposition::single(0.05, 0.3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// Without diffusion the diagonal of the cross term is the product of
    /// the two evolved components.
    #[test]
    fn cross_term_is_product_of_components(x in -40.0f64..80.0, t in 0.0f64..30.0, gamma in 0.0f64..0.4) {
        let c = unit();
        let env = Environment::friction(gamma).unwrap();
        let (a, b) = components();
        let rho = cl_pair_density(&c, &env, &reference(), ComponentPair::AB, x, 0.0, t).unwrap();
        let prod = ck::psi_ck(&c, &env, &a, x, t).unwrap() * ck::psi_ck(&c, &env, &b, x, t).unwrap().conj();
        prop_assert!((rho - prod).norm() <= 1e-9 * prod.norm().max(1e-30), "{} vs {}", rho, prod);
    }

    /// Off the diagonal the two pictures only coincide without friction:
    /// the wave function carries canonical momenta, the density matrix
    /// kinetic ones.
    #[test]
    fn frictionless_cross_term_off_diagonal(x in -40.0f64..80.0, t in 0.0f64..30.0, r in -5.0f64..5.0) {
        let c = unit();
        let env = Environment::default();
        let (a, b) = components();
        let rho = cl_pair_density(&c, &env, &reference(), ComponentPair::AB, x, r, t).unwrap();
        let prod = ck::psi_ck(&c, &env, &a, x + 0.5 * r, t).unwrap() * ck::psi_ck(&c, &env, &b, x - 0.5 * r, t).unwrap().conj();
        prop_assert!((rho - prod).norm() <= 1e-9 * prod.norm().max(1e-30), "{} vs {}", rho, prod);
    }

    #[test]
    fn reversed_pair_is_hermitian_conjugate(x in -40.0f64..80.0, r in -5.0f64..5.0, t in 0.0f64..30.0, kt in 0.0f64..10.0) {
        let c = unit();
        let env = Environment::new(0.1, kt, 0.0).unwrap();
        let ab = cl_pair_density(&c, &env, &reference(), ComponentPair::AB, x, r, t).unwrap();
        let ba = cl_pair_density(&c, &env, &reference(), ComponentPair::BA, x, -r, t).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12 * ab.norm().max(1e-300));
    }

    #[test]
    fn density_nonnegative(x in -60.0f64..120.0, t in 0.0f64..50.0, kt in 0.0f64..10.0) {
        let env = Environment::new(0.1, kt, 0.0).unwrap();
        let rho = rho_diag_cl(&unit(), &env, &reference(), x, t).unwrap();
        prop_assert!(rho >= -1e-12);
    }
}

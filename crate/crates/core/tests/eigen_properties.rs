//! Flux eigenvalue problem: kernel identities, solver cross-checks and the
//! converged maximal backflow.

use backflow_core::eigen::{
    gauss_legendre, kernel_value, max_backflow, nystrom_lambdas, nystrom_spectrum, xi, KernelSpec,
    QuadratureSpec, Rule, SymmetricMatrix,
};
use backflow_core::{Environment, PhysicalConstants};
use proptest::prelude::*;

/// Largest backflow eigenvalue of the free problem as computed by
/// Bracken and Melloy.
const FREE_BOUND_LITERATURE: f64 = 0.038_451_7;

#[test]
fn three_point_rule() {
    let (x, w) = gauss_legendre(3).unwrap();
    let r = (0.6f64).sqrt();
    assert!((x[0] + r).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
    assert!((w[0] - 5.0 / 9.0).abs() < 1e-15 && (w[1] - 8.0 / 9.0).abs() < 1e-15);
}

#[test]
fn kernel_reference_values() {
    let free = KernelSpec::free();
    assert!((kernel_value(free, 1.0, 1.0).unwrap() - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
    assert!((kernel_value(free, 1.0, 0.0).unwrap() - 0.267_848_533_401_163_8).abs() < 1e-15);
    // the forced diagonal limit
    assert!((kernel_value(KernelSpec::forced(0.5), 2.0, 2.0).unwrap() - 3.5 / std::f64::consts::PI).abs() < 1e-15);
    // continuity across the diagonal switch
    let near = kernel_value(KernelSpec::forced(0.5), 2.0, 2.0 + 1e-7).unwrap();
    assert!((near - 3.5 / std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn ql_agrees_with_jacobi_on_kernel_matrix() {
    let quad = QuadratureSpec::new(96, 8.0, Rule::Global).unwrap();
    let (u, w) = quad.nodes().unwrap();
    for xi in [0.0, 0.7] {
        let m = SymmetricMatrix::from_fn(u.len(), |i, j| {
            (w[i] * w[j]).sqrt() * kernel_value(KernelSpec::forced(xi), u[i], u[j]).unwrap()
        });
        let a = m.eigenvalues().unwrap();
        let b = m.eigenvalues_jacobi(60).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }
}

#[test]
fn spectrum_respects_bound() {
    for (n, u_max) in [(64, 8.0), (256, 16.0), (512, 16.0)] {
        for spec in [KernelSpec::free(), KernelSpec::forced(-1.0), KernelSpec::forced(1.0)] {
            let s = nystrom_spectrum(spec, QuadratureSpec::new(n, u_max, Rule::Global).unwrap()).unwrap();
            assert!(s.lambdas.iter().all(|l| l.abs() <= 1.0 + 1e-6));
            assert_eq!(s.lambda_max, *s.lambdas.last().unwrap());
            assert!(s.lambdas.windows(2).all(|p| p[0] <= p[1]));
        }
    }
}

#[test]
fn zero_force_spectrum_equals_free() {
    let quad = QuadratureSpec::new(128, 10.0, Rule::Global).unwrap();
    let a = nystrom_lambdas(KernelSpec::free(), quad).unwrap();
    let b = nystrom_lambdas(KernelSpec::forced(0.0), quad).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-10);
    }
}

#[test]
fn global_and_panel_rules_agree() {
    let global = nystrom_spectrum(KernelSpec::free(), QuadratureSpec::new(512, 16.0, Rule::Global).unwrap()).unwrap();
    let panels =
        nystrom_spectrum(KernelSpec::free(), QuadratureSpec::new(512, 16.0, Rule::Panels { order: 16 }).unwrap()).unwrap();
    let allowed = 2.0 * global.convergence_estimate.max(panels.convergence_estimate);
    assert!(
        (global.lambda_max - panels.lambda_max).abs() <= allowed.max(1e-9),
        "{} vs {} (allowed {allowed})",
        global.lambda_max,
        panels.lambda_max
    );
}

#[test]
fn truncation_converges_from_below() {
    let raw: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| *nystrom_lambdas(KernelSpec::free(), QuadratureSpec::new(n, (n as f64).sqrt(), Rule::Global).unwrap()).unwrap().last().unwrap())
        .collect();
    assert!(raw[0] < raw[1] && raw[1] < raw[2] && raw[2] < FREE_BOUND_LITERATURE);
}

#[test]
fn free_maximal_backflow() {
    let est = max_backflow(KernelSpec::free(), 1e-4).unwrap();
    assert!(est.convergence_estimate <= 1e-4);
    assert!((0.036..=0.041).contains(&est.lambda_max));
    assert!((est.lambda_max - FREE_BOUND_LITERATURE).abs() < 5e-5, "{}", est.lambda_max);
    assert!(est.lambda_max_raw < est.lambda_max);
    assert!(est.spectrum.lambdas.iter().all(|l| l.abs() <= 1.0 + 1e-6));
}

/// Measured, not derived: a force pushing towards the left half-line
/// (`ξ > 0`) raises the achievable backflow.
#[test]
fn maximal_backflow_grows_with_xi() {
    let values: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0]
        .iter()
        .map(|&x| max_backflow(KernelSpec::forced(x), 1e-4).unwrap().lambda_max)
        .collect();
    assert!(values.windows(2).all(|p| p[0] < p[1]), "{values:?}");
}

#[test]
fn spectra_depend_on_parameters_only_through_xi() {
    let quad = QuadratureSpec::new(128, 11.0, Rule::Global).unwrap();
    let one = xi(&PhysicalConstants::new(1.0, 1.0, 1.0).unwrap(), &Environment::new(0.1, 0.0, 0.5).unwrap(), 2.0).unwrap();
    // four times the mass with half the force gives the same ξ
    let two = xi(&PhysicalConstants::new(4.0, 1.0, 1.0).unwrap(), &Environment::new(0.1, 0.0, 0.25).unwrap(), 2.0).unwrap();
    assert!((one - two).abs() <= 1e-15 * one.abs());
    let a = nystrom_lambdas(KernelSpec::forced(one), quad).unwrap();
    let b = nystrom_lambdas(KernelSpec::forced(two), quad).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-10);
    }
}

#[test]
fn invalid_requests_rejected() {
    assert!(max_backflow(KernelSpec::free(), 0.0).is_err());
    assert!(xi(&PhysicalConstants::default(), &Environment::default(), -1.0).is_err());
    assert!(kernel_value(KernelSpec::free(), 0.0, -0.1).is_err());
}

proptest! {
    #[test]
    fn kernel_symmetric(u in 0.0f64..50.0, v in 0.0f64..50.0, x in -3.0f64..3.0) {
        let spec = KernelSpec::forced(x);
        let a = kernel_value(spec, u, v).unwrap();
        let b = kernel_value(spec, v, u).unwrap();
        prop_assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn zero_force_kernel_equals_free(u in 0.0f64..50.0, v in 0.0f64..50.0) {
        let a = kernel_value(KernelSpec::free(), u, v).unwrap();
        let b = kernel_value(KernelSpec::forced(0.0), u, v).unwrap();
        prop_assert!((a - b).abs() <= 1e-15);
    }

    #[test]
    fn free_kernel_ignores_xi(u in 0.0f64..20.0, v in 0.0f64..20.0, x in -3.0f64..3.0) {
        let spec = KernelSpec { xi: x, ..KernelSpec::free() };
        prop_assert_eq!(kernel_value(spec, u, v).unwrap(), kernel_value(KernelSpec::free(), u, v).unwrap());
    }
}

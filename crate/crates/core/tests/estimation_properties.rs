use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_accel::estimation::{
    check_psd, estimate_all, exp_rate_from_trace, hutchinson_trace, mp_from_lmax_trace, mp_from_moments, power_lmax,
    uniform_from_moments,
};
use spectral_accel::linalg::Diagonal;
use spectral_accel::{DenseMatrix, DensityModel};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mp_moment_fit_round_trips(r in 0.01f64..50.0, s2 in 0.01f64..50.0) {
        let m = DensityModel::marchenko_pastur(r, s2).unwrap();
        let fit = mp_from_moments(m.moment(1), m.moment(2)).unwrap();
        prop_assert!(rel(fit.r, r) < 1e-10 && rel(fit.sigma2, s2) < 1e-10);
        prop_assert!(rel(fit.gamma, 1.0 / s2) < 1e-10);
    }

    #[test]
    fn mp_edge_fit_round_trips(r in 0.01f64..50.0, s2 in 0.01f64..50.0, d in 1usize..5000) {
        prop_assume!((r - 1.0).abs() > 1e-6);
        let lmax = s2 * (1.0 + r.sqrt()).powi(2);
        let fit = mp_from_lmax_trace(lmax, d as f64 * s2 * r, d).unwrap();
        prop_assert!(rel(fit.r, r) < 1e-10 && rel(fit.sigma2, s2) < 1e-10);
    }

    #[test]
    fn edge_fit_contains_largest_eigenvalue(lmax in 0.01f64..100.0, frac in 0.001f64..0.999, d in 1usize..1000) {
        let trace = frac * lmax * d as f64;
        let fit = mp_from_lmax_trace(lmax, trace, d).unwrap();
        let edge = fit.sigma2 * (1.0 + fit.r.sqrt()).powi(2);
        prop_assert!(rel(fit.gamma * lmax, (1.0 + fit.r.sqrt()).powi(2)) < 1e-12);
        prop_assert!(lmax <= edge * (1.0 + 1e-12));
        prop_assert!(rel(fit.gamma * trace / d as f64, fit.r) < 1e-12);
        prop_assert!(fit.r > 0.0 && fit.gamma > 0.0);
    }

    #[test]
    fn exponential_fit_round_trips(l0 in 0.001f64..1000.0, d in 1usize..10_000) {
        let m = DensityModel::exponential(l0).unwrap();
        let fit = exp_rate_from_trace(d as f64 * m.moment(1), d).unwrap();
        prop_assert!(rel(fit, l0) < 1e-10);
    }

    #[test]
    fn uniform_fit_round_trips(ell in 0.0f64..10.0, width in 0.001f64..10.0) {
        let m = DensityModel::uniform(ell, ell + width).unwrap();
        let fit = uniform_from_moments(m.moment(1), m.moment(2)).unwrap();
        // β₂ - β₁² cancels down to width²/12, so rounding in the moments is
        // amplified by about L³/width² in the recovered edges.
        let big_l = ell + width;
        let tol = 1e-10 * big_l + 16.0 * f64::EPSILON * big_l.powi(3) / (width * width);
        prop_assert!(fit.ell <= fit.big_l);
        prop_assert!((fit.ell - ell).abs() <= tol, "{} vs {ell}, tol {tol}", fit.ell);
        prop_assert!((fit.big_l - big_l).abs() <= tol, "{} vs {big_l}, tol {tol}", fit.big_l);
        prop_assert!(!fit.clamped);
    }

    #[test]
    fn hutchinson_is_exact_on_diagonals(diag in prop::collection::vec(0.0f64..10.0, 1..60), probes in 1usize..20, seed in any::<u64>()) {
        // Rademacher probes satisfy z_i² = 1.
        let est = hutchinson_trace(&Diagonal(diag.clone()), probes, seed).unwrap();
        let tr: f64 = diag.iter().sum();
        let tr2: f64 = diag.iter().map(|v| v * v).sum();
        prop_assert!((est.trace - tr).abs() <= 1e-12 * tr.max(1.0));
        prop_assert!((est.trace_sq - tr2).abs() <= 1e-12 * tr2.max(1.0));
    }
}

#[test]
fn uniform_fit_clamps_negative_lower_edge() {
    // Moments of an exponential: the moment-matched lower edge is negative.
    let m = DensityModel::exponential(1.0).unwrap();
    let fit = uniform_from_moments(m.moment(1), m.moment(2)).unwrap();
    assert!(fit.clamped);
    assert_eq!(fit.ell, 0.0);
    assert_eq!(fit.big_l, 2.0 * m.moment(1));
}

#[test]
fn invalid_moments_are_rejected() {
    assert!(mp_from_moments(1.0f64, 0.5).is_err());
    assert!(mp_from_moments(1.0f64, 1.0).is_err());
    assert!(mp_from_moments(0.0f64, 1.0).is_err());
    assert!(mp_from_lmax_trace(1.0f64, 10.0, 10).is_err());
    assert!(mp_from_lmax_trace(0.0f64, 0.0, 10).is_err());
    assert!(exp_rate_from_trace(0.0f64, 5).is_err());
    assert!(uniform_from_moments(1.0f64, 0.5).is_err());
}

fn random_gram(n: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
    DenseMatrix::from_nalgebra(&(a.transpose() * &a / d as f64)).unwrap()
}

#[test]
fn hutchinson_is_unbiased_on_dense_matrices() {
    let h = random_gram(60, 40, 3);
    let exact = h.trace();
    let est = hutchinson_trace(&h, 4000, 11).unwrap();
    let z = (est.trace - exact) / est.trace_var.sqrt();
    assert!(z.abs() < 4.0, "z = {z}");
    let exact_sq: f64 = h.as_slice().iter().map(|v| v * v).sum();
    let z = (est.trace_sq - exact_sq) / est.trace_sq_var.sqrt();
    assert!(z.abs() < 4.0, "z = {z}");
}

#[test]
fn power_iteration_finds_largest_eigenvalue() {
    for seed in 0..4u64 {
        let h = random_gram(50, 30, seed);
        let exact = SymmetricEigen::new(h.to_nalgebra()).eigenvalues.max();
        let est = power_lmax(&h, 2000, seed).unwrap();
        assert!(est <= exact * (1.0 + 1e-12));
        assert!(rel(est, exact) < 1e-6, "{est} vs {exact}");
    }
    assert_eq!(power_lmax(&Diagonal(vec![0.0; 4]), 10, 0).unwrap(), 0.0);
}

#[test]
fn psd_check_rejects_indefinite_operators() {
    assert!(check_psd(&Diagonal(vec![1.0, 2.0, 0.0]), 32, 0).is_ok());
    assert!(check_psd(&Diagonal(vec![1.0, -2.0, 3.0]), 32, 0).is_err());
}

#[test]
fn estimate_all_reports_failing_routes_individually() {
    // Constant spectrum: no spread, so only the exponential fit succeeds.
    let est = estimate_all(&Diagonal(vec![2.0f64; 30]), 10, 50, 1).unwrap();
    assert!(est.mp_lmax_trace.is_err());
    assert!(est.mp_moments.is_err());
    assert!(est.uniform.is_err());
    assert!((est.lambda0.clone().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(est.diagnostics.dim, 30);
}

#[test]
fn estimate_all_is_deterministic() {
    let h = random_gram(80, 50, 9);
    let a = estimate_all(&h, 20, 100, 5).unwrap();
    let b = estimate_all(&h, 20, 100, 5).unwrap();
    assert_eq!(a.mp_lmax_trace, b.mp_lmax_trace);
    assert_eq!(a.mp_moments, b.mp_moments);
    assert_eq!(a.diagnostics.trace.to_bits(), b.diagnostics.trace.to_bits());
}

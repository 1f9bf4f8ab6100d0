use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_accel::estimation::mp_from_lmax_trace;
use spectral_accel::linalg::{Diagonal, SymmetricOperator};
use spectral_accel::optimizers::{run, QuadraticOracle};
use spectral_accel::orthopoly::{mp_monic_residual, AveragingWeights};
use spectral_accel::{DenseMatrix, DensityModel, MethodSpec, MethodSpec32, QuadraticProblem};

fn random_problem(d: usize, n: usize, seed: u64) -> QuadraticProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
    let h = DenseMatrix::from_nalgebra(&(a.transpose() * &a / d as f64)).unwrap();
    let x_star: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x0: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    QuadraticProblem { h, x_star, x0, init_scale: 1.0, meta: format!("random d={d} n={n} seed={seed}") }
}

fn spectrum(p: &QuadraticProblem) -> (f64, f64) {
    let e = p.h.symmetric_eigenvalues();
    let lmax = e.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = e.iter().cloned().fold(f64::MAX, f64::min);
    (lmin.max(1e-3), lmax)
}

fn methods(ell: f64, big_l: f64) -> Vec<MethodSpec> {
    let r = 2.0f64;
    let s2 = big_l / (1.0 + r.sqrt()).powi(2);
    vec![
        MethodSpec::GradientDescent { step: 1.0 / big_l },
        MethodSpec::Polyak { ell, big_l },
        MethodSpec::Nesterov { ell, big_l },
        MethodSpec::ChebyshevSemiIterative { ell, big_l },
        MethodSpec::ModifiedChebyshev { big_l },
        MethodSpec::mp_opt(r, s2).unwrap(),
        MethodSpec::exp(2.0 / big_l).unwrap(),
        MethodSpec::unif(0.0, big_l).unwrap(),
        MethodSpec::MpAsymptotic { r, sigma2: s2 },
        MethodSpec::Averaged {
            rec: mp_monic_residual(r, s2).unwrap(),
            weights: AveragingWeights::mp_monic(r).unwrap(),
        },
    ]
}

#[test]
fn iterates_follow_residual_polynomials() {
    for (seed, (d, n)) in [(10usize, 20usize), (17, 12), (30, 45)].into_iter().enumerate() {
        let p = random_problem(d, n, seed as u64);
        let (ell, big_l) = spectrum(&p);
        let eig = SymmetricEigen::new(p.h.to_nalgebra());
        let e0: Vec<f64> = p.x0.iter().zip(&p.x_star).map(|(a, b)| a - b).collect();
        let coords = eig.eigenvectors.transpose() * DVector::from_column_slice(&e0);
        for m in methods(ell, big_l) {
            let poly = m.residual_polynomial().unwrap().unwrap();
            for t in [1usize, 2, 7, 25] {
                let tr = p.run(&m, t).unwrap();
                assert!(!tr.diverged);
                let pl = DVector::from_iterator(d, eig.eigenvalues.iter().map(|l| poly.eval(t, l).unwrap()));
                let oracle = &eig.eigenvectors * coords.component_mul(&pl);
                let got = DVector::from_iterator(d, tr.final_iterate.iter().zip(&p.x_star).map(|(a, b)| a - b));
                let err = (got - &oracle).norm() / oracle.norm().max(1e-300);
                assert!(err <= 1e-8, "{} d={d} t={t}: relative error {err}", m.name());
            }
        }
    }
}

#[test]
fn cg_minimizes_the_energy_norm() {
    for seed in 0..3u64 {
        let p = random_problem(25, 40, 50 + seed);
        let (ell, big_l) = spectrum(&p);
        let cg = p.run(&MethodSpec::ConjugateGradient, 20).unwrap();
        for m in methods(ell, big_l) {
            let tr = p.run(&m, 20).unwrap();
            for t in 0..=20 {
                assert!(cg.f_gap[t] <= tr.f_gap[t] + 1e-10, "{} t={t}: cg {} > {}", m.name(), cg.f_gap[t], tr.f_gap[t]);
            }
        }
    }
}

#[test]
fn cg_terminates_on_low_rank_spectra() {
    let x_star = vec![0.0; 5];
    let x0 = [1.0, -1.0, 2.0, 0.5, 3.0];
    // One nonzero eigenvalue: the first step is exact.
    let h = Diagonal(vec![2.0, 2.0, 2.0, 2.0, 0.0]);
    let tr = run(&MethodSpec::ConjugateGradient, &QuadraticOracle::new(&h, &x_star).unwrap(), &x0, 10).unwrap();
    assert_eq!(tr.f_gap.len(), 11);
    assert!(tr.terminated_early);
    assert!(tr.f_gap[1..].iter().all(|&f| f == 0.0));
    // The kernel component never moves.
    assert_eq!(tr.dist_sq[10], 9.0);
    // Two distinct eigenvalues: converged after two steps.
    let h = Diagonal(vec![1.0, 1.0, 2.0, 2.0, 0.0]);
    let tr = run(&MethodSpec::ConjugateGradient, &QuadraticOracle::new(&h, &x_star).unwrap(), &x0, 10).unwrap();
    assert!(tr.f_gap[2..].iter().all(|&f| f < 1e-28));
    assert!((tr.dist_sq[10] - 9.0).abs() < 1e-12);
}

#[test]
fn optimal_methods_dominate_baselines_in_expectation() {
    let cases: Vec<(DensityModel, MethodSpec, f64, f64)> = vec![
        (DensityModel::marchenko_pastur(2.0, 1.0).unwrap(), MethodSpec::mp_opt(2.0, 1.0).unwrap(), 0.1716, 5.8285),
        (DensityModel::marchenko_pastur(0.5, 1.0).unwrap(), MethodSpec::mp_opt(0.5, 1.0).unwrap(), 0.0858, 2.9142),
        (DensityModel::exponential(1.5).unwrap(), MethodSpec::exp(1.5).unwrap(), 0.01, 4.0),
        (DensityModel::uniform(0.2, 3.0).unwrap(), MethodSpec::unif(0.2, 3.0).unwrap(), 0.2, 3.0),
    ];
    for (model, opt, ell, big_l) in cases {
        let curve = |m: &MethodSpec| {
            let poly = m.residual_polynomial().unwrap().unwrap();
            model.expected_error_curve(poly.as_ref(), 30, 1.0, 0).unwrap()
        };
        let best = curve(&opt);
        let mut others = methods(ell, big_l);
        others.push(MethodSpec::mp_opt(1.5, 0.8).unwrap());
        others.push(MethodSpec::unif(0.0, 2.0 * big_l).unwrap());
        for m in others {
            let c = curve(&m);
            for t in 0..=30 {
                assert!(
                    best[t] <= c[t] * (1.0 + 1e-10) + 1e-300,
                    "{model:?} vs {} t={t}: {} > {}",
                    m.name(),
                    best[t],
                    c[t]
                );
            }
        }
    }
}

#[test]
fn oracle_invariants() {
    let p = random_problem(12, 8, 9);
    let oracle = p.oracle();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(-3.0..3.0)).collect();
        let e: Vec<f64> = x.iter().zip(&p.x_star).map(|(a, b)| a - b).collect();
        let mut he = vec![0.0; 12];
        p.h.apply(&e, &mut he);
        assert_eq!(oracle.gradient(&x), he);
        assert!(oracle.f_gap(&x) >= 0.0);
    }
    assert!(QuadraticOracle::new(&p.h, &[0.0; 3]).is_err());
}

#[test]
fn divergent_runs_are_marked_not_raised() {
    let p = random_problem(6, 10, 4);
    let tr = p.run(&MethodSpec::GradientDescent { step: 1e120 }, 50).unwrap();
    assert!(tr.diverged);
    assert!(tr.dist_sq.len() < 51);
    assert!(tr.dist_sq.iter().chain(&tr.f_gap).chain(&tr.grad_sq).all(|v| v.is_finite()));
}

#[test]
fn invalid_parameters_are_rejected() {
    let p = random_problem(4, 4, 1);
    assert!(p.run(&MethodSpec::Polyak { ell: 0.0, big_l: 1.0 }, 3).is_err());
    assert!(p.run(&MethodSpec::ChebyshevSemiIterative { ell: 0.0, big_l: 1.0 }, 3).is_err());
    assert!(p.run(&MethodSpec::MpAsymptotic { r: 1.0, sigma2: 1.0 }, 3).is_err());
    assert!(p.run(&MethodSpec::GradientDescent { step: f64::NAN }, 3).is_err());
    assert!(p.run(&MethodSpec::ModifiedChebyshev { big_l: -1.0 }, 3).is_err());
}

#[test]
fn single_precision_runs_track_double_precision() {
    let eigs: Vec<f64> = (0..40).map(|i| 0.2 + 0.1 * i as f64).collect();
    let h64 = Diagonal(eigs.clone());
    let h32 = Diagonal(eigs.iter().map(|&v| v as f32).collect());
    let xs64 = vec![0.0f64; 40];
    let xs32 = vec![0.0f32; 40];
    let x0: Vec<f64> = (0..40).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    let x0_32: Vec<f32> = x0.iter().map(|&v| v as f32).collect();
    let a = run(&MethodSpec::mp_opt(2.0, 0.5).unwrap(), &QuadraticOracle::new(&h64, &xs64).unwrap(), &x0, 30).unwrap();
    let b =
        run(&MethodSpec32::mp_opt(2.0, 0.5).unwrap(), &QuadraticOracle::new(&h32, &xs32).unwrap(), &x0_32, 30).unwrap();
    for t in 0..=30 {
        let rel = (a.dist_sq[t] - b.dist_sq[t] as f64).abs() / a.dist_sq[t];
        assert!(rel < 1e-3, "t={t}: {rel}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_invariance(seed in 0u64..1000, shift in prop::collection::vec(-5.0f64..5.0, 15)) {
        let p = random_problem(15, 20, seed);
        let (ell, big_l) = spectrum(&p);
        let mut q = p.clone();
        for i in 0..15 {
            q.x_star[i] += shift[i];
            q.x0[i] += shift[i];
        }
        // Shifts perturb x - x⋆ at rounding level; CG amplifies that by up to
        // the condition number once it has converged.
        let kappa = big_l / ell;
        for m in methods(ell, big_l).into_iter().chain([MethodSpec::ConjugateGradient]) {
            let (a, b) = (p.run(&m, 25).unwrap(), q.run(&m, 25).unwrap());
            for t in 0..=25 {
                prop_assert!((a.dist_sq[t] - b.dist_sq[t]).abs() <= 1e-11 * kappa * a.dist_sq[0].max(1.0),
                    "{} t={}: {} vs {}", m.name(), t, a.dist_sq[t], b.dist_sq[t]);
            }
        }
    }

    #[test]
    fn mp_opt_is_scale_covariant(seed in 0u64..1000, gamma in 0.01f64..100.0) {
        let p = random_problem(20, 35, seed);
        let mut q = p.clone();
        q.h.scale(gamma);
        let fit = |h: &DenseMatrix| {
            let lmax = h.symmetric_eigenvalues().into_iter().fold(f64::MIN, f64::max);
            let f = mp_from_lmax_trace(lmax, h.trace(), h.dim()).unwrap();
            MethodSpec::mp_opt(f.r, f.sigma2).unwrap()
        };
        let (a, b) = (p.run(&fit(&p.h), 30).unwrap(), q.run(&fit(&q.h), 30).unwrap());
        for t in 0..=30 {
            prop_assert!((a.dist_sq[t] - b.dist_sq[t]).abs() <= 1e-10 * a.dist_sq[0], "t={}: {} vs {}", t, a.dist_sq[t], b.dist_sq[t]);
        }
    }

    #[test]
    fn traces_are_nonnegative(seed in 0u64..1000, t in 1usize..40) {
        let p = random_problem(8, 5, seed);
        let (ell, big_l) = spectrum(&p);
        for m in methods(ell, big_l) {
            let tr = p.run(&m, t).unwrap();
            prop_assert_eq!(tr.dist_sq.len(), t + 1);
            prop_assert!(tr.dist_sq.iter().chain(&tr.f_gap).chain(&tr.grad_sq).all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn monte_carlo_matches_expected_error_of_optimal_methods() {
    use spectral_accel::problems::{monte_carlo_expected_error, MethodFactory, MonteCarloSpec, Rotation};
    use spectral_accel::GeneratorSpec;
    const T: usize = 10;
    let cases: Vec<(DensityModel, MethodSpec)> = vec![
        (DensityModel::marchenko_pastur(2.0, 1.0).unwrap(), MethodSpec::mp_opt(2.0, 1.0).unwrap()),
        (DensityModel::exponential(1.0).unwrap(), MethodSpec::exp(1.0).unwrap()),
        (DensityModel::uniform(0.5, 2.0).unwrap(), MethodSpec::unif(0.5, 2.0).unwrap()),
    ];
    for (model, method) in cases {
        let poly = method.residual_polynomial().unwrap().unwrap();
        let expected = model.expected_error_curve(poly.as_ref(), T, 1.0, 0).unwrap();
        let factory: &MethodFactory = &|_: &QuadraticProblem| Ok(method.clone());
        let spec = MonteCarloSpec {
            generator: GeneratorSpec::SampledSpectrum {
                model: model.clone(),
                d: 20,
                seed: 0,
                rotation: Rotation::Identity,
            },
            seeds: 2000,
            base_seed: 31_000,
            horizon: T,
            init_scale: 1.0,
            jobs: None,
        };
        let agg = monte_carlo_expected_error(&spec, factory).unwrap();
        for t in 0..=T {
            let z = (agg.dist_sq.mean[t] - expected[t]) / agg.dist_sq.stderr[t];
            assert!(z.abs() < 3.0, "{model:?} t={t}: mc {} vs {} (z = {z})", agg.dist_sq.mean[t], expected[t]);
        }
    }
}

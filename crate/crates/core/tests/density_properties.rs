use num_rational::BigRational;
use proptest::prelude::*;
use spectral_accel::density::mp_moment_exact;
use spectral_accel::DensityModel;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn models() -> impl Strategy<Value = DensityModel> {
    prop_oneof![
        (0.05f64..6.0, 0.1f64..4.0).prop_map(|(r, s2)| DensityModel::marchenko_pastur(r, s2).unwrap()),
        (0.1f64..5.0).prop_map(|l0| DensityModel::exponential(l0).unwrap()),
        (0.0f64..2.0, 0.1f64..5.0).prop_map(|(l, w)| DensityModel::uniform(l, l + w).unwrap()),
        prop::collection::vec(0.0f64..10.0, 1..40).prop_map(|e| DensityModel::empirical(e).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_is_conserved(m in models()) {
        let mass = m.weighted_integral(|_| 1.0, 0).unwrap();
        prop_assert!((mass - 1.0).abs() < 1e-8, "{m:?}: mass {mass}");
    }

    #[test]
    fn quadrature_reproduces_moments(m in models()) {
        for k in 0..=6u32 {
            let quad = m.weighted_integral(|l| l.powi(k as i32), 0).unwrap();
            let exact = m.moment(k);
            prop_assert!((quad - exact).abs() <= 1e-8 * exact.abs().max(1.0), "{m:?} k={k}: {quad} vs {exact}");
        }
    }

    #[test]
    fn beta_weight_shifts_moments(m in models(), beta in 0u32..3) {
        let quad = m.weighted_integral(|l| l, beta).unwrap();
        let exact = m.moment(beta + 1);
        prop_assert!((quad - exact).abs() <= 1e-8 * exact.abs().max(1.0));
    }

    #[test]
    fn support_invariants(m in models()) {
        let s = m.support();
        prop_assert!(s.zero_mass >= 0.0 && s.zero_mass < 1.0);
        prop_assert!(s.lower <= s.upper);
        if let DensityModel::MarchenkoPastur { r, sigma2 } = m {
            let sr = r.sqrt();
            prop_assert!((s.lower - sigma2 * (1.0 - sr).powi(2)).abs() < 1e-12 * sigma2);
            prop_assert!((s.upper - sigma2 * (1.0 + sr).powi(2)).abs() < 1e-12 * sigma2);
            prop_assert_eq!(s.zero_mass, (1.0 - r).max(0.0));
        }
    }

    #[test]
    fn moments_are_nonnegative(m in models()) {
        prop_assert!(m.moments(8).iter().all(|&b| b >= 0.0));
    }

    #[test]
    fn cdf_is_monotone(m in models()) {
        let cdf = m.tabulated_cdf().unwrap();
        prop_assert!(cdf.cdf.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(cdf.lambda.windows(2).all(|w| w[0] <= w[1]));
        let last = *cdf.cdf.last().unwrap();
        prop_assert!((last - 1.0).abs() < 1e-6, "cdf ends at {last}");
    }
}

#[test]
fn mp_moment_ratios_are_exact() {
    for (r, s2) in [(q(1, 2), q(1, 1)), (q(3, 1), q(2, 5)), (q(7, 4), q(9, 2)), (q(1, 1), q(1, 3))] {
        let b1 = mp_moment_exact(r.clone(), s2.clone(), 1);
        let b2 = mp_moment_exact(r.clone(), s2.clone(), 2);
        let var = b2 - b1.clone() * b1.clone();
        assert_eq!(b1.clone() * b1.clone() / var.clone(), r);
        assert_eq!(var / b1, s2);
    }
}

#[test]
fn mp_moments_match_narayana_sum() {
    // β_k = σ^{2k} Σ_{j=1}^{k} N(k, j) r^j with Narayana numbers
    // N(k, j) = C(k, j) C(k, j-1) / k.
    fn binom(n: i64, k: i64) -> i64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let (r, s2) = (q(5, 3), q(3, 2));
    for k in 1..=8i64 {
        let mut sum = q(0, 1);
        for j in 1..=k {
            let n = binom(k, j) * binom(k, j - 1) / k;
            sum += q(n, 1) * num_traits::pow(r.clone(), j as usize);
        }
        let expected = sum * num_traits::pow(s2.clone(), k as usize);
        assert_eq!(mp_moment_exact(r.clone(), s2.clone(), k as u32), expected, "k={k}");
    }
}

#[test]
fn sample_moments_agree_with_closed_form() {
    const N: usize = 100_000;
    let models = [
        DensityModel::marchenko_pastur(0.5, 1.0).unwrap(),
        DensityModel::marchenko_pastur(2.0, 0.7).unwrap(),
        DensityModel::exponential(2.0).unwrap(),
        DensityModel::uniform(0.5, 3.0).unwrap(),
    ];
    for (i, m) in models.iter().enumerate() {
        let xs = m.sample_eigenvalues(N, 77 + i as u64).unwrap();
        assert_eq!(xs.len(), N);
        let s = m.support();
        assert!(xs.iter().all(|&x| x >= 0.0 && x <= s.upper));
        for k in 1..=3u32 {
            let mean = xs.iter().map(|x| x.powi(k as i32)).sum::<f64>() / N as f64;
            let var = m.moment(2 * k) - m.moment(k).powi(2);
            let se = (var / N as f64).sqrt();
            let z = (mean - m.moment(k)) / se;
            assert!(z.abs() < 3.0, "{m:?} k={k}: z = {z}");
        }
    }
}

#[test]
fn sampling_is_seeded() {
    let m = DensityModel::marchenko_pastur(0.8, 1.0).unwrap();
    assert_eq!(m.sample_eigenvalues(64, 5).unwrap(), m.sample_eigenvalues(64, 5).unwrap());
    assert_ne!(m.sample_eigenvalues(64, 5).unwrap(), m.sample_eigenvalues(64, 6).unwrap());
}

#[test]
fn mp_zero_atom_is_exact() {
    let m = DensityModel::marchenko_pastur(0.25, 1.0).unwrap();
    let rule = m.measure_rule(0, false).unwrap();
    assert_eq!(rule.atom, 0.75);
    assert_eq!(m.measure_rule(1, false).unwrap().atom, 0.0);
    // Residual polynomials take the value 1 on the atom.
    let cont = m.weighted_integral(|_| 1.0, 0).unwrap() - rule.atom;
    assert!((cont - 0.25).abs() < 1e-10);
}

#[test]
fn degenerate_mp_is_integrable() {
    let m = DensityModel::marchenko_pastur(1.0, 1.0).unwrap();
    assert_eq!(m.support().lower, 0.0);
    for k in 0..=4u32 {
        let quad = m.weighted_integral(|l| l.powi(k as i32), 0).unwrap();
        assert!((quad - m.moment(k)).abs() < 1e-8, "k={k}: {quad} vs {}", m.moment(k));
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(DensityModel::marchenko_pastur(0.0, 1.0).is_err());
    assert!(DensityModel::marchenko_pastur(1.0, -1.0).is_err());
    assert!(DensityModel::exponential(f64::NAN).is_err());
    assert!(DensityModel::uniform(2.0, 1.0).is_err());
    assert!(DensityModel::uniform(-1.0, 1.0).is_err());
    assert!(DensityModel::empirical(vec![]).is_err());
    assert!(DensityModel::empirical(vec![1.0, -0.5]).is_err());
}

#[test]
fn summary_serializes_infinite_edge_as_null() {
    let s = DensityModel::exponential(1.5).unwrap().summary();
    let v = serde_json::to_value(&s).unwrap();
    assert_eq!(v["support"][1], serde_json::Value::Null);
    assert_eq!(v["zero_mass"], 0.0);
}

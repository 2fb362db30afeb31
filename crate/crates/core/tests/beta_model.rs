mod common;

use pdd::policy::{beta_cdf, ln_gamma, smrd_count_model};
use proptest::prelude::*;

#[test]
fn fractional_parameters_match_quadrature() {
    for &(a, b) in &[
        (1.5, 2.5),
        (2.2, 7.9),
        (3.7, 1.3),
        (1.0, 4.5),
        (6.25, 6.25),
        (12.5, 3.5),
    ] {
        for t in 1..=19 {
            let x = t as f64 * 0.05;
            let got = beta_cdf(x, a, b).unwrap();
            let want = common::beta_cdf_simpson_oracle(x, a, b, 20_000);
            assert!(
                (got - want).abs() < 1e-8,
                "I_{x}({a},{b}) = {got}, quadrature {want}"
            );
        }
    }
}

#[test]
fn ln_gamma_matches_factorials() {
    let mut fact = 1.0f64;
    for n in 1..25u32 {
        assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-10 * fact.ln().max(1.0));
        fact *= n as f64;
    }
    assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
}

#[test]
fn endpoints_and_domain() {
    assert_eq!(beta_cdf(0.0, 2.0, 3.0).unwrap(), 0.0);
    assert_eq!(beta_cdf(1.0, 2.0, 3.0).unwrap(), 1.0);
    assert!(beta_cdf(-0.1, 2.0, 3.0).is_err());
    assert!(beta_cdf(0.5, 0.0, 3.0).is_err());
    assert!(beta_cdf(0.5, 2.0, f64::NAN).is_err());
}

proptest! {
    #[test]
    fn symmetry(x in 0.001f64..0.999, a in 0.5f64..20.0, b in 0.5f64..20.0) {
        let lhs = beta_cdf(x, a, b).unwrap();
        let rhs = 1.0 - beta_cdf(1.0 - x, b, a).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn monotone_in_x(x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0, a in 0.5f64..20.0, b in 0.5f64..20.0) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        prop_assert!(beta_cdf(lo, a, b).unwrap() <= beta_cdf(hi, a, b).unwrap() + 1e-14);
    }

    #[test]
    fn count_model_is_bounded_and_monotone(t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0, n in 1usize..100_000) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = smrd_count_model(lo, 2.0, 5.0, n).unwrap();
        let b = smrd_count_model(hi, 2.0, 5.0, n).unwrap();
        prop_assert!(a <= b && b <= n);
    }
}

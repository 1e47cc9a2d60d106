mod common;

use common::{eq, rat, EXP_111, EXP_213, HARMONIC, NON_INTEGRABLE, PRODUCT};
use proptest::prelude::*;
use quadlin::equation::DEFAULT_BOX;
use quadlin::expr::{parse, Params};
use quadlin::linearize::{check_conditions, detect_affine_linear, Affinity, AFFINE_TOL, DEFAULT_SAMPLES, DEFAULT_TOL};
use quadlin::QuadEquation;

fn check(eq: &QuadEquation, seed: u64) -> quadlin::linearize::LinearizabilityReport {
    check_conditions(eq, DEFAULT_SAMPLES, seed, DEFAULT_TOL).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Coefficient in thousandths, bounded away from zero.
fn coefficient() -> impl Strategy<Value = i64> {
    prop_oneof![-3000i64..=-100, 100i64..=3000]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_equations_pass_with_coefficient_ratios(
        a in coefficient(), b in coefficient(), c in coefficient(), d in -3000i64..=3000,
        seed in any::<u64>(),
    ) {
        let params = Params::from([
            ("a".to_string(), rat(a, 1000)),
            ("b".to_string(), rat(b, 1000)),
            ("c".to_string(), rat(c, 1000)),
            ("d".to_string(), rat(d, 1000)),
        ]);
        let eq = QuadEquation::new(parse("a*u00 + b*u10 + c*u01 + d", &params).unwrap(), DEFAULT_BOX).unwrap();
        let Affinity::Affine(coef) = detect_affine_linear(&eq, AFFINE_TOL).unwrap() else {
            return Err(TestCaseError::fail("affine equation not detected"));
        };
        let (a, b, c, d) = (a as f64 / 1000.0, b as f64 / 1000.0, c as f64 / 1000.0, d as f64 / 1000.0);
        for (got, want) in [(coef.coef_u00, a), (coef.coef_u10, b), (coef.coef_u01, c), (coef.intercept, d)] {
            prop_assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
        }
        let report = check(&eq, seed);
        prop_assert!(report.passed);
        prop_assert!(rel(report.a, coef.coef_u00 / coef.coef_u10) <= 1e-8);
        prop_assert!(rel(report.b, coef.coef_u00 / coef.coef_u01) <= 1e-8);
        prop_assert!(rel(report.c, coef.coef_u01 / coef.coef_u10) <= 1e-8);
    }

    #[test]
    fn ratio_estimates_are_seed_stable(s1 in any::<u64>(), s2 in any::<u64>()) {
        for text in [EXP_111, EXP_213, HARMONIC] {
            let eq = eq(text);
            let (r1, r2) = (check(&eq, s1), check(&eq, s2));
            prop_assert!(r1.passed && r2.passed);
            prop_assert!(rel(r1.a, r2.a) <= 1e-8 && rel(r1.b, r2.b) <= 1e-8 && rel(r1.c, r2.c) <= 1e-8);
            prop_assert!(r1.consistency <= 1e-6 * (1.0 + r1.a.abs()));
        }
    }

    #[test]
    fn non_integrable_form_never_passes(seed in any::<u64>()) {
        let report = check(&eq(NON_INTEGRABLE), seed);
        prop_assert!(!report.passed);
        prop_assert_eq!(report.failing_condition, check(&eq(NON_INTEGRABLE), 1).failing_condition);
    }
}

#[test]
fn exp_family_ratios() {
    let r = check(&eq(EXP_213), 1);
    assert!(r.passed);
    assert!(r.residuals.iter().all(|x| *x <= 1e-8));
    assert!(rel(r.a, 2.0) <= 1e-12);
    assert!(rel(r.b, 2.0 / 3.0) <= 1e-12);
    assert!(rel(r.c, 3.0) <= 1e-12);
    assert!((r.a - r.b * r.c).abs() <= 1e-12);
}

#[test]
fn product_form_fails_the_second_condition() {
    for seed in 0..10 {
        let r = check(&eq(PRODUCT), seed);
        assert!(!r.passed);
        assert_eq!(r.failing_condition, Some(2));
    }
}

#[test]
fn curved_equations_are_not_affine() {
    for text in [EXP_213, HARMONIC, PRODUCT] {
        assert_eq!(detect_affine_linear(&eq(text), AFFINE_TOL).unwrap(), Affinity::NonAffine);
    }
}

#[test]
fn too_few_samples() {
    assert!(check_conditions(&eq(EXP_111), 10, 1, DEFAULT_TOL).is_err());
}

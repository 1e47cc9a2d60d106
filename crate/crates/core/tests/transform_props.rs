mod common;

use common::{eq, EXP_111, EXP_213, HARMONIC, NON_INTEGRABLE};
use proptest::prelude::*;
use quadlin::transform::{
    build_psi, certify, fit_linear_model, recover_alpha, AlphaTable, CertifyOptions, Certification, CERTIFY_TOL,
};

const CATALOG: [&str; 4] = ["u00 + u10 + u01", EXP_111, EXP_213, HARMONIC];

fn run(text: &str, seed: u64) -> Certification {
    certify(&eq(text), seed, &CertifyOptions::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gauge_changes_only_the_offset(seed in any::<u64>()) {
        let c = run(EXP_213, seed);
        let (psi, m1) = c.transform.unwrap();
        let (lambda, mu) = (2.0, 3.0);
        let m2 = fit_linear_model(&eq(EXP_213), &psi.with_gauge(lambda, mu), 400, seed, CERTIFY_TOL).unwrap();
        prop_assert!((m1.p - m2.p).abs() <= 1e-9 && (m1.q - m2.q).abs() <= 1e-9 && (m1.r - m2.r).abs() <= 1e-9);
        let expected = lambda * m1.s + mu * (1.0 - m1.p - m1.q - m1.r);
        prop_assert!((m2.s - expected).abs() <= 1e-9 * (1.0 + expected.abs()), "{} vs {expected}", m2.s);
    }

    #[test]
    fn certified_coefficients_match_condition_ratios(seed in any::<u64>()) {
        for text in CATALOG {
            let c = run(text, seed);
            prop_assert!(c.certified(), "{text}");
            let (psi, m) = c.transform.unwrap();
            prop_assert!(rel(m.p / m.q, c.report.a) <= 1e-5, "{text}: {m:?} vs A = {}", c.report.a);
            prop_assert!(rel(m.p / m.r, c.report.b) <= 1e-5, "{text}: {m:?} vs B = {}", c.report.b);
            prop_assert!(psi.monotone());
        }
    }
}

#[test]
fn alpha_does_not_depend_on_the_frozen_pair() {
    for text in [EXP_213, HARMONIC] {
        let eq = eq(text);
        let mid = eq.midpoint();
        let a = AlphaTable::build(&eq, [0.2, 1.7], 32, mid, (mid, mid)).unwrap();
        let b = AlphaTable::build(&eq, [0.2, 1.7], 32, mid, (0.4, 1.3)).unwrap();
        for x in a.knots() {
            let (ya, yb) = (a.alpha(*x).unwrap(), b.alpha(*x).unwrap());
            assert!(rel(ya, yb) <= 1e-6, "{text} at {x}: {ya} vs {yb}");
        }
    }
}

#[test]
fn harmonic_psi_is_an_affine_image_of_the_reciprocal() {
    let c = run(HARMONIC, 1);
    let (psi, _) = c.transform.unwrap();
    let xr = psi.alpha().x_ref();
    let exact = |x: f64| xr - xr * xr / x;
    let scale = psi.knot_values().map(|(x, _)| exact(x).abs()).fold(0.0, f64::max);
    let worst = psi.knot_values().map(|(x, y)| (y - exact(x)).abs()).fold(0.0, f64::max);
    assert!(worst / scale <= 1e-6, "{worst} / {scale}");
}

#[test]
fn exp_family_coefficients() {
    let c = certify(&eq(EXP_213), 3, &CertifyOptions { roundtrip: Some((30, 30)), ..Default::default() }).unwrap();
    let (_, m) = c.transform.unwrap();
    for (got, want) in [(m.p / m.q, 2.0), (m.r / m.q, 3.0)] {
        assert!(rel(got, want) <= 1e-6, "{m:?}");
    }
    assert!(c.roundtrip.unwrap() <= 1e-6);
}

#[test]
fn forced_fit_of_a_non_linearizable_form_is_poor() {
    let options = CertifyOptions { force: true, ..Default::default() };
    let c = certify(&eq(NON_INTEGRABLE), 1, &options).unwrap();
    assert!(!c.report.passed);
    let (_, m) = c.transform.unwrap();
    assert!(!m.certified && m.residual > 1e-2, "{m:?}");
}

#[test]
fn failed_conditions_block_alpha_recovery() {
    let eq = eq(NON_INTEGRABLE);
    let report = quadlin::linearize::check_conditions(&eq, 200, 1, 1e-7).unwrap();
    assert!(recover_alpha(&eq, &report, 32, [0.2, 1.7]).is_err());
    let ok = quadlin::linearize::check_conditions(&common::eq(EXP_111), 200, 1, 1e-7).unwrap();
    let table = recover_alpha(&common::eq(EXP_111), &ok, 32, [0.2, 1.7]).unwrap();
    assert!(build_psi(&table).unwrap().monotone());
}

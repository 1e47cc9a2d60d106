#![allow(dead_code)]

pub mod oracle;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use quadlin::expr::{Constant, Expression, Node, Site};
use quadlin::QuadEquation;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn eq(text: &str) -> QuadEquation {
    QuadEquation::parse(text).unwrap()
}

pub const EXP_111: &str = "log(exp(u10) + exp(u01) + exp(u00))";
pub const EXP_213: &str = "log(2*exp(u00) + exp(u10) + 3*exp(u01))";
pub const HARMONIC: &str = "1/(1/u00 + 1/u10 + 1/u01)";
pub const PRODUCT: &str = "u00*u10 + u01";
pub const NON_INTEGRABLE: &str = "u00 + u10*u01";

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        3 => prop::sample::select(Site::RHS.to_vec()).prop_map(Node::Var),
        // Literals are decimals, so denominators are products of 2 and 5.
        1 => (-5i64..=5, prop::sample::select(vec![1i64, 2, 4, 5, 8])).prop_map(|(n, d)| Node::Const(Constant::new(rat(n, d)))),
    ]
}

fn exponent() -> impl Strategy<Value = Constant> {
    prop::sample::select(vec![(-3, 1), (-2, 1), (-1, 1), (0, 1), (2, 1), (3, 1), (1, 2), (-1, 2), (3, 2)])
        .prop_map(|(n, d)| Constant::new(rat(n, d)))
}

/// Random right-hand sides of depth at most 6.
pub fn node_strategy() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Div(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), exponent()).prop_map(|(a, e)| Node::Pow(Box::new(a), e)),
            inner.clone().prop_map(|a| Node::Exp(Box::new(a))),
            inner.prop_map(|a| Node::Log(Box::new(a))),
        ]
    })
}

pub fn point_strategy() -> impl Strategy<Value = [f64; 3]> {
    [0.3f64..2.5, 0.3f64..2.5, 0.3f64..2.5]
}

/// Outcome of comparing dual partials with finite differences at one point.
#[derive(Debug, PartialEq)]
pub enum Comparison {
    /// Both agree; the worst relative deviation.
    Agrees(f64),
    /// Typed evaluation error, or a stencil that leaves the domain.
    Skipped,
    Disagrees { partial: usize, dual: f64, fd: f64 },
    NanEscape,
}

/// Dual partials against central differences, relative to `max(1, |partial|)`.
///
/// The reference is the closest of a plain central difference with
/// `h = 1e-6` and Richardson extrapolations at `h = 1e-3, 1e-4`, all scaled
/// by `max(1, |x|)`, so neither truncation near poles nor cancellation at
/// tiny steps alone decides the outcome.
pub fn compare_with_finite_differences(expr: &Expression, p: [f64; 3], tol: f64) -> Comparison {
    let (value, grad) = match expr.gradient(p, 0.0) {
        Ok(v) => v,
        Err(_) => return Comparison::Skipped,
    };
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Comparison::NanEscape;
    }
    if value.abs() > 1e6 || grad.iter().any(|g| g.abs() > 1e6) {
        return Comparison::Skipped;
    }
    let f = |q: [f64; 3]| expr.eval(&q, 0.0).ok().filter(|v| v.is_finite());
    let mut worst: f64 = 0.0;
    for (i, &dual) in grad.iter().enumerate() {
        let central = |h: f64| {
            let (mut a, mut b) = (p, p);
            a[i] += h;
            b[i] -= h;
            Some((f(a)? - f(b)?) / (2.0 * h))
        };
        let richardson = |h: f64| Some((4.0 * central(h / 2.0)? - central(h)?) / 3.0);
        let s = p[i].abs().max(1.0);
        let estimates = [central(1e-6 * s), richardson(1e-3 * s), richardson(1e-4 * s)];
        let Some(rel) = estimates
            .iter()
            .flatten()
            .map(|fd| (dual - fd).abs() / dual.abs().max(1.0))
            .min_by(f64::total_cmp)
        else {
            return Comparison::Skipped;
        };
        if rel > tol {
            let fd = estimates.iter().flatten().next().copied().unwrap_or(f64::NAN);
            return Comparison::Disagrees { partial: i, dual, fd };
        }
        worst = worst.max(rel);
    }
    Comparison::Agrees(worst)
}

//! Evaluation of expression trees over any [`Scalar`] type.

use num_traits::Float;
use thiserror::Error;

use super::ast::{Constant, Expression, Node, NodeKind, Site};

/// Why a scalar operation could not produce a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    Domain,
    NonRational,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    /// Division by (near) zero, log of a non-positive value, overflow and similar.
    #[error("domain error at {node} node #{index}")]
    Domain { node: NodeKind, index: usize },
    /// The operation leaves the scalar type (e.g. `exp` of a rational function).
    #[error("non-rational operation at {node} node #{index}")]
    NonRational { node: NodeKind, index: usize },
    #[error("no value supplied for {0}")]
    UnboundVariable(Site),
}

/// Arithmetic needed to evaluate an expression tree.
///
/// Division and negative powers are only attempted after `near_zero` has
/// returned false for the divisor.
pub trait Scalar: Clone {
    fn constant(c: &Constant) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Self;
    /// `guard == 0` means exact zero only.
    fn near_zero(&self, guard: f64) -> bool;
    fn powi(&self, n: i64) -> Result<Self, Failure>;
    fn powf(&self, exponent: &Constant) -> Result<Self, Failure>;
    fn exp(&self) -> Result<Self, Failure>;
    fn ln(&self) -> Result<Self, Failure>;
    fn is_finite(&self) -> bool;
}

impl<T: Float> Scalar for T {
    fn constant(c: &Constant) -> Self {
        T::from(c.approx()).unwrap_or_else(T::nan)
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn sub(&self, other: &Self) -> Self {
        *self - *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn div(&self, other: &Self) -> Self {
        *self / *other
    }
    fn near_zero(&self, guard: f64) -> bool {
        let mag = self.abs().to_f64().unwrap_or(f64::NAN);
        if guard > 0.0 {
            mag <= guard
        } else {
            mag == 0.0
        }
    }
    fn powi(&self, n: i64) -> Result<Self, Failure> {
        let n = i32::try_from(n).map_err(|_| Failure::Domain)?;
        Ok(Float::powi(*self, n))
    }
    fn powf(&self, exponent: &Constant) -> Result<Self, Failure> {
        if *self <= T::zero() {
            return Err(Failure::Domain);
        }
        Ok(Float::powf(*self, T::constant(exponent)))
    }
    fn exp(&self) -> Result<Self, Failure> {
        Ok(Float::exp(*self))
    }
    fn ln(&self) -> Result<Self, Failure> {
        if *self <= T::zero() {
            return Err(Failure::Domain);
        }
        Ok(Float::ln(*self))
    }
    fn is_finite(&self) -> bool {
        Float::is_finite(*self)
    }
}

/// Division guard used while sampling; values closer to zero count as a domain error.
pub const DEFAULT_GUARD: f64 = 1e-8;

impl Expression {
    /// Evaluate with `values[site.index()]` bound to each site.
    ///
    /// Divisors and bases of negative powers with `near_zero(guard)` are
    /// rejected, as are non-finite intermediate values.
    pub fn eval<S: Scalar>(&self, values: &[S], guard: f64) -> Result<S, EvalError> {
        let mut index = 0;
        eval_node(self.root(), values, guard, &mut index)
    }

    /// Plain `f64` evaluation at `(u00, u10, u01)` with no division guard.
    pub fn eval3(&self, u00: f64, u10: f64, u01: f64) -> Result<f64, EvalError> {
        self.eval(&[u00, u10, u01], 0.0)
    }
}

fn eval_node<S: Scalar>(node: &Node, values: &[S], guard: f64, index: &mut usize) -> Result<S, EvalError> {
    let here = *index;
    *index += 1;
    let kind = node.kind();
    let domain = || EvalError::Domain { node: kind, index: here };
    let lift = |f: Failure| match f {
        Failure::Domain => EvalError::Domain { node: kind, index: here },
        Failure::NonRational => EvalError::NonRational { node: kind, index: here },
    };
    let value = match node {
        Node::Var(site) => values.get(site.index()).cloned().ok_or(EvalError::UnboundVariable(*site))?,
        Node::Const(c) => S::constant(c),
        Node::Add(a, b) => {
            let a = eval_node(a, values, guard, index)?;
            a.add(&eval_node(b, values, guard, index)?)
        }
        Node::Sub(a, b) => {
            let a = eval_node(a, values, guard, index)?;
            a.sub(&eval_node(b, values, guard, index)?)
        }
        Node::Mul(a, b) => {
            let a = eval_node(a, values, guard, index)?;
            a.mul(&eval_node(b, values, guard, index)?)
        }
        Node::Div(a, b) => {
            let a = eval_node(a, values, guard, index)?;
            let b = eval_node(b, values, guard, index)?;
            if b.near_zero(guard) {
                return Err(domain());
            }
            a.div(&b)
        }
        Node::Neg(a) => eval_node(a, values, guard, index)?.neg(),
        Node::Pow(a, e) => {
            let base = eval_node(a, values, guard, index)?;
            match e.as_i64() {
                Some(n) => {
                    if n < 0 && base.near_zero(guard) {
                        return Err(domain());
                    }
                    base.powi(n).map_err(lift)?
                }
                None => base.powf(e).map_err(lift)?,
            }
        }
        Node::Exp(a) => eval_node(a, values, guard, index)?.exp().map_err(lift)?,
        Node::Log(a) => eval_node(a, values, guard, index)?.ln().map_err(lift)?,
    };
    if !value.is_finite() {
        return Err(domain());
    }
    Ok(value)
}

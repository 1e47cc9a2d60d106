//! Forward-mode dual numbers with `N` infinitesimal directions.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::Float;

use super::ast::{Constant, Expression};
use super::eval::{EvalError, Failure, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub re: T,
    pub eps: [T; N],
}

impl<T: Float, const N: usize> Dual<T, N> {
    pub fn constant(re: T) -> Self {
        Dual { re, eps: [T::zero(); N] }
    }

    /// The `i`-th independent variable with value `re`.
    pub fn variable(re: T, i: usize) -> Self {
        let mut eps = [T::zero(); N];
        eps[i] = T::one();
        Dual { re, eps }
    }

    /// `f(re) + f'(re) * eps`.
    fn chain(&self, value: T, slope: T) -> Self {
        Dual { re: value, eps: self.eps.map(|e| e * slope) }
    }
}

impl<T: Float, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut eps = self.eps;
        for (e, d) in eps.iter_mut().zip(o.eps) {
            *e = *e + d;
        }
        Dual { re: self.re + o.re, eps }
    }
}

impl<T: Float, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Float, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: self.eps.map(|e| -e) }
    }
}

impl<T: Float, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut eps = self.eps;
        for (e, d) in eps.iter_mut().zip(o.eps) {
            *e = *e * o.re + self.re * d;
        }
        Dual { re: self.re * o.re, eps }
    }
}

impl<T: Float, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        let re = self.re * inv;
        let mut eps = self.eps;
        for (e, d) in eps.iter_mut().zip(o.eps) {
            *e = (*e - re * d) * inv;
        }
        Dual { re, eps }
    }
}

impl<T: Float, const N: usize> Scalar for Dual<T, N> {
    fn constant(c: &Constant) -> Self {
        Dual::constant(<T as Scalar>::constant(c))
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
        self.re.near_zero(guard)
    }
    fn powi(&self, n: i64) -> Result<Self, Failure> {
        if n == 0 {
            return Ok(Dual::constant(T::one()));
        }
        let k = i32::try_from(n).map_err(|_| Failure::Domain)?;
        let slope = T::from(n).ok_or(Failure::Domain)? * self.re.powi(k - 1);
        Ok(self.chain(self.re.powi(k), slope))
    }
    fn powf(&self, exponent: &Constant) -> Result<Self, Failure> {
        if self.re <= T::zero() {
            return Err(Failure::Domain);
        }
        let p = <T as Scalar>::constant(exponent);
        let value = self.re.powf(p);
        Ok(self.chain(value, p * value / self.re))
    }
    fn exp(&self) -> Result<Self, Failure> {
        let value = self.re.exp();
        Ok(self.chain(value, value))
    }
    fn ln(&self) -> Result<Self, Failure> {
        if self.re <= T::zero() {
            return Err(Failure::Domain);
        }
        Ok(self.chain(self.re.ln(), self.re.recip()))
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.eps.iter().all(|e| e.is_finite())
    }
}

impl Expression {
    /// Value and gradient with respect to `(u00, u10, u01)`.
    pub fn gradient<T: Float>(&self, point: [T; 3], guard: f64) -> Result<(T, [T; 3]), EvalError> {
        let vars: Vec<Dual<T, 3>> = (0..3).map(|i| Dual::variable(point[i], i)).collect();
        let d = self.eval(&vars, guard)?;
        Ok((d.re, d.eps))
    }
}

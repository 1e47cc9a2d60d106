//! Reduced rational functions in one variable `z`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::poly::{Coefficient, Poly};
use crate::expr::{Constant, Failure, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("division by the zero rational function")]
pub struct DivisionByZeroFunction;

/// `num / den` with `gcd(num, den) = 1` and a canonical leading coefficient of `den`.
#[derive(Clone, PartialEq, Debug)]
pub struct RationalFunction<C> {
    num: Poly<C>,
    den: Poly<C>,
}

impl<C: Coefficient> RationalFunction<C> {
    /// Reduce `num / den` to canonical form.
    pub fn new(num: Poly<C>, den: Poly<C>) -> Result<Self, DivisionByZeroFunction> {
        if den.is_zero() {
            return Err(DivisionByZeroFunction);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_exact(&g), den.div_exact(&g)) };
        Ok(Self::canonical(num, den))
    }

    /// Normalize the leading coefficient of an already coprime pair.
    fn canonical(num: Poly<C>, den: Poly<C>) -> Self {
        let unit = C::unit_of(den.leading().expect("nonzero denominator"));
        if unit == C::one() {
            RationalFunction { num, den }
        } else {
            RationalFunction { num: num.div_scalar(&unit), den: den.div_scalar(&unit) }
        }
    }

    pub fn zero() -> Self {
        RationalFunction { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly<C>) -> Self {
        RationalFunction { num: p, den: Poly::one() }
    }

    pub fn num(&self) -> &Poly<C> {
        &self.num
    }

    pub fn den(&self) -> &Poly<C> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `max(deg num, deg den)`.
    pub fn degree(&self) -> usize {
        self.num.deg0().max(self.den.deg0())
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::new(self.num.add(&o.num), self.den.clone()).expect("nonzero denominator");
        }
        // a/b + c/d with g = gcd(b, d): (a d' + c b') / (b' d' g)
        let g = self.den.gcd(&o.den);
        let (b1, d1) = if g.is_one() { (self.den.clone(), o.den.clone()) } else { (self.den.div_exact(&g), o.den.div_exact(&g)) };
        let num = self.num.mul(&d1).add(&o.num.mul(&b1));
        let den = b1.mul(&o.den);
        Self::new(num, den).expect("nonzero denominator")
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        // cross-cancel before multiplying; the factors stay coprime
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let div = |p: &Poly<C>, g: &Poly<C>| if g.is_one() { p.clone() } else { p.div_exact(g) };
        let num = div(&self.num, &g1).mul(&div(&o.num, &g2));
        let den = div(&self.den, &g2).mul(&div(&o.den, &g1));
        Self::new(num, den).expect("nonzero denominator")
    }

    pub fn inv(&self) -> Result<Self, DivisionByZeroFunction> {
        if self.is_zero() {
            return Err(DivisionByZeroFunction);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self, DivisionByZeroFunction> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<Self, DivisionByZeroFunction> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// The constant `c`; `None` if its denominator vanishes in `C`.
    pub fn from_rational(c: &BigRational) -> Option<Self> {
        let num = Poly::constant(C::from_bigint(c.numer()));
        let den = Poly::constant(C::from_bigint(c.denom()));
        if den.is_zero() {
            return None;
        }
        Self::new(num, den).ok()
    }
}

impl RationalFunction<BigInt> {
    /// Value at `z`; `None` at a pole.
    pub fn eval_rational(&self, z: &BigRational) -> Option<BigRational> {
        let d = self.den.eval_rational(z);
        (!d.is_zero()).then(|| self.num.eval_rational(z) / d)
    }
}

impl<C: Coefficient> Scalar for RationalFunction<C> {
    fn constant(c: &Constant) -> Self {
        Self::from_rational(c.exact()).expect("constant denominator vanishes modulo the field")
    }
    fn add(&self, other: &Self) -> Self {
        RationalFunction::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RationalFunction::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RationalFunction::mul(self, other)
    }
    fn neg(&self) -> Self {
        RationalFunction::neg(self)
    }
    fn div(&self, other: &Self) -> Self {
        RationalFunction::div(self, other).expect("divisor checked by near_zero")
    }
    fn near_zero(&self, _guard: f64) -> bool {
        self.is_zero()
    }
    fn powi(&self, n: i64) -> Result<Self, Failure> {
        self.pow(n).map_err(|_| Failure::Domain)
    }
    fn powf(&self, _exponent: &Constant) -> Result<Self, Failure> {
        Err(Failure::NonRational)
    }
    fn exp(&self) -> Result<Self, Failure> {
        Err(Failure::NonRational)
    }
    fn ln(&self) -> Result<Self, Failure> {
        Err(Failure::NonRational)
    }
    fn is_finite(&self) -> bool {
        true
    }
}

impl<C: Coefficient> fmt::Display for RationalFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

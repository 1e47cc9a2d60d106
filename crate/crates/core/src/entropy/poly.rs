//! Dense univariate polynomials over an exact coefficient ring.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::Fp61;

/// Exact coefficient arithmetic: the integers or a prime field.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    /// Image of an integer.
    fn from_bigint(v: &BigInt) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `self / o` when `o` divides `self` exactly.
    fn div_exact(&self, o: &Self) -> Self;
    fn gcd(&self, o: &Self) -> Self;
    /// Unit that makes a leading coefficient canonical (its sign, or itself in a field).
    fn unit_of(lc: &Self) -> Self;
    /// Content of a nonzero coefficient list, normalized so the primitive part has
    /// a canonical leading coefficient.
    fn content(coeffs: &[Self]) -> Self;
}

impl Coefficient for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert!(Zero::is_zero(&(self % o)), "inexact division");
        self / o
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn unit_of(lc: &Self) -> Self {
        if lc.is_negative() {
            -<BigInt as One>::one()
        } else {
            <BigInt as One>::one()
        }
    }
    fn content(coeffs: &[Self]) -> Self {
        let mut g = <BigInt as Zero>::zero();
        for c in coeffs {
            g = Integer::gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        match coeffs.last() {
            Some(lc) if lc.is_negative() => -g,
            _ => g,
        }
    }
}

impl Coefficient for Fp61 {
    fn zero() -> Self {
        Fp61::ZERO
    }
    fn one() -> Self {
        Fp61::ONE
    }
    fn is_zero(&self) -> bool {
        Fp61::is_zero(*self)
    }
    fn from_i64(v: i64) -> Self {
        Fp61::from_i64(v)
    }
    fn from_bigint(v: &BigInt) -> Self {
        Fp61::from_bigint(v)
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn div_exact(&self, o: &Self) -> Self {
        *self * o.inverse().expect("division by zero in Fp61")
    }
    fn gcd(&self, o: &Self) -> Self {
        if Fp61::is_zero(*self) && Fp61::is_zero(*o) {
            Fp61::ZERO
        } else {
            Fp61::ONE
        }
    }
    fn unit_of(lc: &Self) -> Self {
        *lc
    }
    fn content(coeffs: &[Self]) -> Self {
        coeffs.last().copied().unwrap_or(Fp61::ZERO)
    }
}

/// `coeffs[i]` is the coefficient of `z^i`; no trailing zeros, zero is empty.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> Poly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Coefficient::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(C::one())
    }

    /// `a z + b`.
    pub fn linear(a: C, b: C) -> Self {
        Poly::new(vec![b, a])
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C::one()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as 0.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let zero = C::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero).add(o.coeffs.get(i).unwrap_or(&zero)))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Poly { coeffs: self.coeffs.iter().map(C::neg).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Divide every coefficient by `c`, which must divide each of them.
    pub fn div_scalar(&self, c: &C) -> Self {
        Poly { coeffs: self.coeffs.iter().map(|a| a.div_exact(c)).collect() }
    }

    pub fn content(&self) -> C {
        C::content(&self.coeffs)
    }

    /// `self / content`; the zero polynomial stays zero.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        self.div_scalar(&self.content())
    }

    /// Pseudo-remainder `lc(d)^(deg self - deg d + 1) self mod d`.
    pub fn pseudo_rem(&self, d: &Self) -> Self {
        let dd = d.degree().expect("pseudo-division by zero");
        let lc = d.leading().unwrap().clone();
        let mut r = self.clone();
        let mut steps = (self.deg0() + 1).saturating_sub(dd) as i64;
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let lr = r.leading().unwrap().clone();
            let shift = dr - dd;
            let mut coeffs: Vec<C> = r.coeffs.iter().map(|c| c.mul(&lc)).collect();
            for (j, b) in d.coeffs.iter().enumerate() {
                coeffs[j + shift] = coeffs[j + shift].sub(&lr.mul(b));
            }
            coeffs.pop();
            r = Poly::new(coeffs);
            steps -= 1;
        }
        for _ in 0..steps.max(0) {
            r = r.scale(&lc);
        }
        r
    }

    /// Quotient of an exact division.
    pub fn div_exact(&self, d: &Self) -> Self {
        let dd = d.degree().expect("division by zero polynomial");
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = d.leading().unwrap().clone();
        let mut r = self.coeffs.clone();
        let n = self.coeffs.len();
        assert!(n > dd, "inexact polynomial division");
        let mut q = vec![C::zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = r[k + dd].div_exact(&lc);
            if !c.is_zero() {
                for (j, b) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].sub(&c.mul(b));
                }
            }
            q[k] = c;
        }
        debug_assert!(r.iter().all(Coefficient::is_zero), "inexact polynomial division");
        Poly::new(q)
    }

    /// Greatest common divisor by the subresultant remainder sequence, with
    /// canonical leading coefficient.
    pub fn gcd(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.normalized();
        }
        if o.is_zero() {
            return self.normalized();
        }
        let (mut a, mut b) = if self.deg0() >= o.deg0() { (self.clone(), o.clone()) } else { (o.clone(), self.clone()) };
        let d = a.content().gcd(&b.content());
        let d = d.div_exact(&C::unit_of(&d));
        if b.deg0() == 0 {
            return Poly::constant(d);
        }
        a = a.primitive_part();
        b = b.primitive_part();
        let mut g = C::one();
        let mut h = C::one();
        loop {
            let delta = a.deg0() - b.deg0();
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                break;
            }
            if r.deg0() == 0 {
                return Poly::constant(d);
            }
            let mut divisor = g.clone();
            for _ in 0..delta {
                divisor = divisor.mul(&h);
            }
            a = b;
            b = r.div_scalar(&divisor);
            g = a.leading().unwrap().clone();
            // h = g^delta / h^(delta - 1)
            let mut num = C::one();
            for _ in 0..delta {
                num = num.mul(&g);
            }
            let mut den = C::one();
            for _ in 1..delta {
                den = den.mul(&h);
            }
            h = num.div_exact(&den);
        }
        b.primitive_part().scale(&d)
    }

    /// Scaled so the leading coefficient is canonical.
    pub fn normalized(&self) -> Self {
        match self.leading() {
            Some(lc) => self.div_scalar(&C::unit_of(lc)),
            None => Poly::zero(),
        }
    }
}

impl Poly<BigInt> {
    pub fn eval_rational(&self, z: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * z + BigRational::from_integer(c.clone()))
    }
}

impl<C: Coefficient> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{i}")?,
            }
        }
        Ok(())
    }
}

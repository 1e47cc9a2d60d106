//! Integers modulo the Mersenne prime `2^61 - 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

pub const MODULUS: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp61(u64);

impl Fp61 {
    pub const ZERO: Fp61 = Fp61(0);
    pub const ONE: Fp61 = Fp61(1);

    pub fn new(value: u64) -> Self {
        Fp61(value % MODULUS)
    }

    pub fn from_i64(value: i64) -> Self {
        let r = value.rem_euclid(MODULUS as i64);
        Fp61(r as u64)
    }

    pub fn from_bigint(value: &BigInt) -> Self {
        let r = value.mod_floor(&BigInt::from(MODULUS));
        Fp61(r.to_u64().expect("reduced residue fits in u64"))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp61::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        (!self.is_zero()).then(|| self.pow(MODULUS - 2))
    }
}

impl Add for Fp61 {
    type Output = Fp61;
    fn add(self, o: Fp61) -> Fp61 {
        let s = self.0 + o.0;
        Fp61(if s >= MODULUS { s - MODULUS } else { s })
    }
}

impl Sub for Fp61 {
    type Output = Fp61;
    fn sub(self, o: Fp61) -> Fp61 {
        Fp61(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + MODULUS - o.0 })
    }
}

impl Neg for Fp61 {
    type Output = Fp61;
    fn neg(self) -> Fp61 {
        Fp61::ZERO - self
    }
}

impl Mul for Fp61 {
    type Output = Fp61;
    fn mul(self, o: Fp61) -> Fp61 {
        let wide = self.0 as u128 * o.0 as u128;
        // 2^61 = 1 (mod p)
        let folded = (wide as u64 & MODULUS) + (wide >> 61) as u64;
        Fp61::new(folded)
    }
}

impl fmt::Debug for Fp61 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fp61 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = Fp61::from_i64(-1);
        assert_eq!(a.value(), MODULUS - 1);
        assert_eq!(a * a, Fp61::ONE);
        let x = Fp61::new(123_456_789_012_345);
        assert_eq!(x * x.inverse().unwrap(), Fp61::ONE);
        assert_eq!(Fp61::ZERO.inverse(), None);
        assert_eq!(Fp61::from_bigint(&BigInt::from(-5)), Fp61::from_i64(-5));
        let big = Fp61::new(MODULUS - 2);
        assert_eq!(big * big, Fp61::new(4));
    }
}

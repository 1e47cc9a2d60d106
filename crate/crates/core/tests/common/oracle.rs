//! Independent exact arithmetic for checking degree sequences.
//!
//! Polynomial equations are expanded in the initial values as multivariate
//! polynomials before substituting the linear data; rational equations use
//! univariate fractions over Q reduced by the Euclidean algorithm.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use quadlin::entropy::initial_coefficients;
use quadlin::expr::{Constant, Expression, Failure, Scalar};
use quadlin::lattice::Grid;

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Dense univariate polynomial over Q, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly(pub Vec<Q>);

impl UPoly {
    pub fn trim(mut v: Vec<Q>) -> Self {
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        UPoly(v)
    }
    pub fn constant(c: Q) -> Self {
        UPoly::trim(vec![c])
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Q::zero();
        UPoly::trim((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }
    pub fn neg(&self) -> Self {
        UPoly(self.0.iter().map(|c| -c).collect())
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly(vec![]);
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::trim(out)
    }
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let mut r = self.0.clone();
        let lead = d.0.last().unwrap().clone();
        if r.len() < d.0.len() {
            return (UPoly(vec![]), self.clone());
        }
        let mut quot = vec![Q::zero(); r.len() - d.0.len() + 1];
        for k in (0..quot.len()).rev() {
            let c = &r[k + d.0.len() - 1] / &lead;
            for (i, di) in d.0.iter().enumerate() {
                r[k + i] -= &c * di;
            }
            quot[k] = c;
        }
        (UPoly::trim(quot), UPoly::trim(r))
    }
    pub fn monic(&self) -> Self {
        match self.0.last() {
            Some(lead) => UPoly(self.0.iter().map(|c| c / lead).collect()),
            None => self.clone(),
        }
    }
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.monic(), o.monic());
        while !b.is_zero() {
            let r = a.div_rem(&b).1.monic();
            a = b;
            b = r;
        }
        a
    }
    pub fn eval(&self, z: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * z + c)
    }
}

/// Reduced fraction of univariate polynomials over Q.
#[derive(Clone, Debug, PartialEq)]
pub struct Frac {
    pub num: UPoly,
    pub den: UPoly,
}

impl Frac {
    pub fn new(num: UPoly, den: UPoly) -> Self {
        let g = num.gcd(&den);
        let (num, den) = (num.div_rem(&g).0, den.div_rem(&g).0);
        let lead = den.0.last().unwrap().clone();
        let scale = UPoly::constant(Q::one() / lead);
        Frac { num: num.mul(&scale), den: den.mul(&scale) }
    }
    pub fn linear(a: i64, b: i64) -> Self {
        Frac::new(UPoly(vec![q(b), q(a)]), UPoly::constant(Q::one()))
    }
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }
}

impl Scalar for Frac {
    fn constant(c: &Constant) -> Self {
        Frac::new(UPoly::constant(c.exact().clone()), UPoly::constant(Q::one()))
    }
    fn add(&self, o: &Self) -> Self {
        Frac::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        Frac::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn neg(&self) -> Self {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }
    fn div(&self, o: &Self) -> Self {
        Frac::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }
    fn near_zero(&self, _guard: f64) -> bool {
        self.num.is_zero()
    }
    fn powi(&self, n: i64) -> Result<Self, Failure> {
        let base = if n < 0 {
            if self.num.is_zero() {
                return Err(Failure::Domain);
            }
            Frac::new(self.den.clone(), self.num.clone())
        } else {
            self.clone()
        };
        let mut acc = Frac::new(UPoly::constant(Q::one()), UPoly::constant(Q::one()));
        for _ in 0..n.abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
    fn powf(&self, _: &Constant) -> Result<Self, Failure> {
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

/// Bits per variable in a packed exponent vector.
const BITS: u32 = 7;

/// Integer polynomial in the initial values `x_0 .. x_8`, keyed by packed
/// exponents (7 bits per variable), with overflow-checked coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly(pub HashMap<u64, i128>);

fn exponent(key: u64, i: usize) -> u64 {
    (key >> (BITS as usize * i)) & ((1 << BITS) - 1)
}

impl MPoly {
    pub fn var(i: usize) -> Self {
        assert!(i < 9);
        MPoly(HashMap::from([(1u64 << (BITS as usize * i), 1)]))
    }
    pub fn scalar(c: i128) -> Self {
        MPoly(if c == 0 { HashMap::new() } else { HashMap::from([(0, c)]) })
    }
    pub fn total_degree(&self) -> usize {
        self.0.keys().map(|&k| (0..9).map(|i| exponent(k, i) as usize).sum()).max().unwrap_or(0)
    }
    /// Substitute `x_i = a_i z + b_i` and expand, Horner style in each variable.
    pub fn substitute(&self, coeffs: &[(i64, i64)]) -> Vec<BigInt> {
        let mut terms: Vec<(u64, i128)> = self.0.iter().map(|(k, c)| (*k, *c)).collect();
        terms.sort_unstable();
        trim(horner(&terms, coeffs.len(), coeffs))
    }
}

/// `sum c * prod x_i^e_i` over variables `0..vars`, where all terms share
/// exponents of the variables from `vars` on.
fn horner(terms: &[(u64, i128)], vars: usize, coeffs: &[(i64, i64)]) -> Vec<BigInt> {
    if vars == 0 {
        return vec![terms.iter().map(|(_, c)| BigInt::from(*c)).sum()];
    }
    let v = vars - 1;
    let (a, b) = (BigInt::from(coeffs[v].0), BigInt::from(coeffs[v].1));
    // Group by the exponent of `x_v`; keys sort with the highest variable most significant.
    let mut groups: Vec<(u64, &[(u64, i128)])> = Vec::new();
    let mut start = 0;
    for i in 1..=terms.len() {
        if i == terms.len() || exponent(terms[i].0, v) != exponent(terms[start].0, v) {
            groups.push((exponent(terms[start].0, v), &terms[start..i]));
            start = i;
        }
    }
    let mut acc: Vec<BigInt> = vec![];
    let mut power = groups.last().map_or(0, |g| g.0);
    for (k, group) in groups.iter().rev() {
        while power > *k {
            acc = times_linear(&acc, &a, &b);
            power -= 1;
        }
        let inner = horner(group, v, coeffs);
        if acc.len() < inner.len() {
            acc.resize(inner.len(), BigInt::zero());
        }
        for (x, y) in acc.iter_mut().zip(inner) {
            *x += y;
        }
    }
    while power > 0 {
        acc = times_linear(&acc, &a, &b);
        power -= 1;
    }
    acc
}

fn times_linear(p: &[BigInt], a: &BigInt, b: &BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] += c * b;
        out[i + 1] += c * a;
    }
    out
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

impl Scalar for MPoly {
    fn constant(c: &Constant) -> Self {
        let v = c.as_i64().expect("polynomial oracle takes integer constants");
        MPoly::scalar(v as i128)
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = self.0.clone();
        for (k, c) in &o.0 {
            let e = out.entry(*k).or_insert(0);
            *e = e.checked_add(*c).expect("coefficient overflow");
        }
        out.retain(|_, c| *c != 0);
        MPoly(out)
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        let mut out: HashMap<u64, i128> = HashMap::with_capacity(self.0.len() * o.0.len() / 4 + 1);
        for (k1, c1) in &self.0 {
            for (k2, c2) in &o.0 {
                let e = out.entry(k1 + k2).or_insert(0);
                *e = e.checked_add(c1.checked_mul(*c2).expect("coefficient overflow")).expect("coefficient overflow");
            }
        }
        out.retain(|_, c| *c != 0);
        MPoly(out)
    }
    fn neg(&self) -> Self {
        MPoly(self.0.iter().map(|(k, c)| (*k, -c)).collect())
    }
    fn div(&self, _: &Self) -> Self {
        unreachable!("the polynomial oracle only runs division-free equations")
    }
    fn near_zero(&self, _: f64) -> bool {
        self.0.is_empty()
    }
    fn powi(&self, n: i64) -> Result<Self, Failure> {
        if n < 0 {
            return Err(Failure::NonRational);
        }
        let mut acc = MPoly::scalar(1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        Ok(acc)
    }
    fn powf(&self, _: &Constant) -> Result<Self, Failure> {
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

pub fn staircase<T: Clone + PartialEq + std::fmt::Debug>(depth: usize, value: impl Fn(usize) -> T) -> Grid<T> {
    let row: Vec<T> = (0..=depth).map(&value).collect();
    let mut col = vec![row[0].clone()];
    col.extend((depth + 1..=2 * depth).map(&value));
    Grid::staircase(row, col).unwrap()
}

pub fn diagonal<T: Scalar>(rhs: &Expression, init: &Grid<T>, depth: usize, degree: impl Fn(&T) -> usize) -> Vec<usize> {
    let grid = init.evolve(|a, b, c| rhs.eval(&[a.clone(), b.clone(), c.clone()], 0.0)).unwrap();
    (1..=depth).map(|k| degree(grid.get(k, k).unwrap())).collect()
}

/// Degrees by multivariate expansion followed by substitution.
pub fn polynomial_oracle(rhs: &Expression, depth: usize, seed: u64) -> Vec<usize> {
    let coeffs = initial_coefficients(depth, seed);
    let init = staircase(depth, MPoly::var);
    diagonal(rhs, &init, depth, |p| p.substitute(&coeffs).len().saturating_sub(1))
}

/// Degrees by univariate fractions over Q on the corner `0..=upto` of the
/// depth-`depth` staircase.
pub fn fraction_oracle(rhs: &Expression, depth: usize, seed: u64, upto: usize) -> Vec<usize> {
    let coeffs = initial_coefficients(depth, seed);
    let value = |i: usize| Frac::linear(coeffs[i].0, coeffs[i].1);
    let row: Vec<Frac> = (0..=upto).map(value).collect();
    let mut col = vec![row[0].clone()];
    col.extend((depth + 1..=depth + upto).map(value));
    diagonal(rhs, &Grid::staircase(row, col).unwrap(), upto, Frac::degree)
}


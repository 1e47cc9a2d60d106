//! Degree sequences along the lattice diagonal and their growth class.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use super::field::Fp61;
use super::poly::{Coefficient, Poly};
use super::rational::RationalFunction;
use crate::equation::QuadEquation;
use crate::expr::Rationality;
use crate::lattice::Grid;
use crate::report::{float_value, Report};

/// Re-seeds allowed after a degenerate trajectory.
pub const MAX_RETRIES: usize = 5;
/// Smallest last-three degree ratio counted as exponential growth.
pub const EXPONENTIAL_RATIO: f64 = 1.25;
pub const MIN_DEPTH: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("equation is not rational (exp, log or a fractional power)")]
    NonRationalEquation,
    #[error("at least {MIN_DEPTH} degrees are required, got {0}")]
    TooShort(usize),
    #[error("degenerate trajectory after {MAX_RETRIES} re-seeds")]
    DegenerateTrajectory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthClass {
    Constant,
    Linear,
    Polynomial,
    Exponential,
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthClass::Constant => "constant",
            GrowthClass::Linear => "linear",
            GrowthClass::Polynomial => "polynomial",
            GrowthClass::Exponential => "exponential",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth {
    pub class: GrowthClass,
    /// `ln(d_K / d_{K-1})` for exponential growth, else 0.
    pub entropy: f64,
}

/// Classify by the last three first differences and ratios:
/// constant if the differences vanish, linear if they are equal and at least 1,
/// exponential if every ratio is at least 1.25, polynomial otherwise.
pub fn classify_growth(degrees: &[usize]) -> Result<Growth, EntropyError> {
    let k = degrees.len();
    if k < MIN_DEPTH {
        return Err(EntropyError::TooShort(k));
    }
    let tail = &degrees[k - 4..];
    let diffs: Vec<i64> = tail.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    let class = if diffs.iter().all(|d| *d == 0) {
        GrowthClass::Constant
    } else if diffs.iter().all(|d| *d == diffs[0]) && diffs[0] >= 1 {
        GrowthClass::Linear
    } else if tail.windows(2).all(|w| w[0] > 0 && w[1] as f64 / w[0] as f64 >= EXPONENTIAL_RATIO) {
        GrowthClass::Exponential
    } else {
        GrowthClass::Polynomial
    };
    let entropy = match class {
        GrowthClass::Exponential => (degrees[k - 1] as f64 / degrees[k - 2] as f64).ln(),
        _ => 0.0,
    };
    Ok(Growth { class, entropy })
}

/// Coefficient arithmetic for the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Arbitrary-precision integers.
    Exact,
    /// Integers modulo `2^61 - 1`; degrees agree with the exact backend unless a
    /// leading coefficient or resultant happens to vanish modulo the prime.
    PrimeField,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::PrimeField => "prime-field",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSequence {
    /// `d_1 .. d_K`, the degree at diagonal cell `(k, k)`.
    pub degrees: Vec<usize>,
    pub growth: Growth,
    /// Seed that produced a non-degenerate run.
    pub seed_used: u64,
    pub backend: Backend,
}

impl Report for DegreeSequence {
    fn to_json(&self) -> Value {
        json!({
            "degrees": self.degrees,
            "classification": self.growth.class.to_string(),
            "entropy": float_value(self.growth.entropy),
            "heuristic": true,
            "backend": self.backend.to_string(),
            "seed_used": self.seed_used,
        })
    }

    fn to_csv(&self) -> Option<String> {
        let mut out = String::from("k,degree\n");
        for (k, d) in self.degrees.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k + 1, d));
        }
        Some(out)
    }
}

/// Seeded staircase coefficients `(a_i, b_i)` with values in `[-5, 5] \ {0}`:
/// row cells `(0..=K, 0)` first, then column cells `(0, 1..=K)`.
///
/// The roots `-b_i / a_i` are pairwise distinct, so no two initial values are
/// proportional. There are 38 such roots, which bounds `K` by 18.
pub fn initial_coefficients(depth: usize, seed: u64) -> Vec<(i64, i64)> {
    assert!(2 * depth + 1 <= 38, "depth {depth} exceeds the distinct-root supply");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let v = rng.gen_range(1..=10);
        if v <= 5 {
            -(v as i64)
        } else {
            v as i64 - 5
        }
    };
    let mut roots = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(2 * depth + 1);
    while out.len() < 2 * depth + 1 {
        let (a, b) = (draw(), draw());
        let g = num_integer::gcd(a, b) * a.signum();
        if roots.insert((b / g, a / g)) {
            out.push((a, b));
        }
    }
    out
}

fn staircase<C: Coefficient>(depth: usize, coeffs: &[(i64, i64)]) -> Grid<RationalFunction<C>> {
    let value = |(a, b): (i64, i64)| RationalFunction::from_poly(Poly::linear(C::from_i64(a), C::from_i64(b)));
    let row: Vec<_> = coeffs[..=depth].iter().map(|c| value(*c)).collect();
    let mut col = vec![row[0].clone()];
    col.extend(coeffs[depth + 1..].iter().map(|c| value(*c)));
    Grid::staircase(row, col).expect("depth >= 1")
}

/// Diagonal degrees of one run, or `None` if the run degenerates.
fn run<C: Coefficient>(eq: &QuadEquation, depth: usize, seed: u64) -> Option<Vec<usize>> {
    let init = staircase::<C>(depth, &initial_coefficients(depth, seed));
    let grid = init.evolve(|a, b, c| eq.rhs().eval(&[a.clone(), b.clone(), c.clone()], 0.0)).ok()?;
    let degrees: Vec<usize> = (1..=depth).map(|k| grid.get(k, k).expect("evolved").degree()).collect();
    if degrees.contains(&0) {
        return None;
    }
    Some(degrees)
}

/// Evolve degree-1 polynomial staircase data exactly and record the degree at
/// each diagonal cell; re-seed up to five times on degenerate cancellation.
pub fn degree_sequence(
    eq: &QuadEquation,
    depth: usize,
    seed: u64,
    backend: Backend,
) -> Result<DegreeSequence, EntropyError> {
    if eq.rhs().classify_rational() != Rationality::Rational {
        return Err(EntropyError::NonRationalEquation);
    }
    if depth < MIN_DEPTH {
        return Err(EntropyError::TooShort(depth));
    }
    for attempt in 0..=MAX_RETRIES as u64 {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let degrees = match backend {
            Backend::Exact => run::<BigInt>(eq, depth, s),
            Backend::PrimeField => run::<Fp61>(eq, depth, s),
        };
        if let Some(degrees) = degrees {
            let growth = classify_growth(&degrees)?;
            return Ok(DegreeSequence { degrees, growth, seed_used: s, backend });
        }
    }
    Err(EntropyError::DegenerateTrajectory)
}

/// Degree sequences for several seeds and whether they agree elementwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedCheck {
    pub sequences: Vec<DegreeSequence>,
    /// False when some seed hit a non-generic cancellation.
    pub stable: bool,
}

pub fn seed_check(eq: &QuadEquation, depth: usize, seeds: &[u64], backend: Backend) -> Result<SeedCheck, EntropyError> {
    let sequences = seeds
        .iter()
        .map(|s| degree_sequence(eq, depth, *s, backend))
        .collect::<Result<Vec<_>, _>>()?;
    let stable = sequences.windows(2).all(|w| w[0].degrees == w[1].degrees);
    Ok(SeedCheck { sequences, stable })
}

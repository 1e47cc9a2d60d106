//! Explicit quad equations `u11 = F(u00, u10, u01)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{EquationFile, EvalError, Expression, FileError, ParseError, Params, DEFAULT_GUARD};

pub const DEFAULT_BOX: [f64; 2] = [0.2, 1.7];

const EVALUABLE_SAMPLES: usize = 200;
const EVALUABLE_FRACTION: f64 = 0.9;
const EVALUABLE_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Error)]
pub enum EquationError {
    #[error("right-hand side references no site variable")]
    NoSites,
    #[error("invalid sample box [{0}, {1}]")]
    InvalidBox(f64, f64),
    #[error("right-hand side evaluable on only {evaluable} of {samples} sample points")]
    NotEvaluable { evaluable: usize, samples: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    File(#[from] FileError),
}

#[derive(Clone, Debug)]
pub struct QuadEquation {
    rhs: Expression,
    sample_box: [f64; 2],
    guard: f64,
}

impl QuadEquation {
    pub fn new(rhs: Expression, sample_box: [f64; 2]) -> Result<Self, EquationError> {
        if rhs.sites().is_empty() {
            return Err(EquationError::NoSites);
        }
        let [lo, hi] = sample_box;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(EquationError::InvalidBox(lo, hi));
        }
        let eq = QuadEquation { rhs, sample_box, guard: DEFAULT_GUARD };
        let mut rng = ChaCha8Rng::seed_from_u64(EVALUABLE_SEED);
        let evaluable = (0..EVALUABLE_SAMPLES)
            .filter(|_| {
                let p = eq.sample_point(&mut rng);
                eq.eval_guarded(p).is_ok()
            })
            .count();
        if (evaluable as f64) < EVALUABLE_FRACTION * EVALUABLE_SAMPLES as f64 {
            return Err(EquationError::NotEvaluable { evaluable, samples: EVALUABLE_SAMPLES });
        }
        Ok(eq)
    }

    /// Parse `text` with no parameters on the default box.
    pub fn parse(text: &str) -> Result<Self, EquationError> {
        Self::new(crate::expr::parse(text, &Params::new())?, DEFAULT_BOX)
    }

    pub fn from_file(file: &EquationFile) -> Result<Self, EquationError> {
        Self::new(file.expression()?, file.sample_box.unwrap_or(DEFAULT_BOX))
    }

    pub fn rhs(&self) -> &Expression {
        &self.rhs
    }

    pub fn sample_box(&self) -> [f64; 2] {
        self.sample_box
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.sample_box[0] + self.sample_box[1])
    }

    /// Uniform point in the sample box cubed.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        let [lo, hi] = self.sample_box;
        [rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi)]
    }

    /// `F` with no division guard (exact zero divisors only).
    pub fn eval(&self, p: [f64; 3]) -> Result<f64, EvalError> {
        self.rhs.eval(&p, 0.0)
    }

    /// `F` with the sampling guard on divisors.
    pub fn eval_guarded(&self, p: [f64; 3]) -> Result<f64, EvalError> {
        self.rhs.eval(&p, self.guard)
    }

    /// Value and partials of `F` with the sampling guard on divisors.
    pub fn gradient(&self, p: [f64; 3]) -> Result<(f64, [f64; 3]), EvalError> {
        self.rhs.gradient(p, self.guard)
    }
}

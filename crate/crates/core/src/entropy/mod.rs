//! Algebraic-entropy pre-screen by exact degree growth.

mod field;
mod growth;
mod poly;
mod rational;

pub use field::{Fp61, MODULUS};
pub use growth::{classify_growth, degree_sequence, initial_coefficients, seed_check, Backend, DegreeSequence, EntropyError, Growth, GrowthClass, SeedCheck, MAX_RETRIES};
pub use poly::{Coefficient, Poly};
pub use rational::{DivisionByZeroFunction, RationalFunction};

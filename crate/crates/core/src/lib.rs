//! Linearizability analysis for quad-graph partial difference equations.
//!
//! Parse an explicit equation `u11 = F(u00, u10, u01)`, test the necessary
//! conditions for linearization by a point transformation, build and certify
//! the transformation, check the discrete Burgers family against its linear
//! counterpart, and probe degree growth of exact iterates.

pub mod cli;
pub mod colehopf;
pub mod entropy;
pub mod equation;
pub mod expr;
pub mod lattice;
pub mod linearize;
pub mod report;
pub mod transform;

pub use equation::{EquationError, QuadEquation};
pub use expr::{parse, Expression, Site};
pub use lattice::{Grid, LatticeError};
pub use report::{emit_report, Format, Report};

pub type Dual3 = expr::Dual<f64, 3>;
pub type BigPoly = entropy::Poly<num_bigint::BigInt>;
pub type ExactRationalFunction = entropy::RationalFunction<num_bigint::BigInt>;
pub type PrimeRationalFunction = entropy::RationalFunction<entropy::Fp61>;

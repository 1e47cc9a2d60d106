//! Equation DSL: parsing, printing and generic evaluation.

mod ast;
mod dual;
mod eval;
mod file;
mod parser;

pub use ast::{Constant, Expression, Node, NodeKind, Rationality, Site};
pub use dual::Dual;
pub use eval::{EvalError, Failure, Scalar, DEFAULT_GUARD};
pub use file::{EquationFile, FileError};
pub use parser::{parse, parse_decimal, parse_relation, ParseError, Params};

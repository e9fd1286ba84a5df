//! Formulas: AST, concrete syntax, well-formedness and metrics.

mod ast;
mod check;
mod parser;

pub use ast::{Formula, LogBinder, Term};
pub use check::{metrics, resolve, validate, validate_sentence, FreeVars, Metrics, ValidationError};
pub use parser::{parse_formula, parse_terms, SyntaxError};

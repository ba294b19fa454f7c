//! Closed-form meromorphic functions of one complex variable.
//!
//! Expressions support exact substitution `z ↦ z + c` (the shift underlying
//! `Δ_c` and `f(z + kc)`) and exact symbolic differentiation. Evaluation runs
//! in the overflow-free [`Wide`] representation and reports poles and `0/0`
//! explicitly instead of returning infinities or NaNs.

mod diff;
mod expr;
mod parse;
mod value;

pub use diff::{differentiate, differentiate_n};
pub use expr::{Eval, EvalResult, Expr, DEFAULT_POLE_TOL, ZERO_TEST_TOL};
pub use parse::{parse_complex, parse_expr};
pub use value::Wide;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncError {
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("no regular sample point: every probe hit a pole or an indeterminate form")]
    NoRegularSamples,
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

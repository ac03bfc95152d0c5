//! Exact polynomial germs: representation, evaluation, differentiation and
//! the text format.

mod multi_index;
mod parse;
mod poly;

pub use multi_index::MultiIndex;
pub use parse::{parse, parse_poly};
pub use poly::{CompiledPoly, Poly, PolyGerm};


use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GermError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{index} at {pos} out of range for n = {n}")]
    VariableOutOfRange { index: usize, n: usize, pos: usize },
    #[error("constant term must be 0 (found {0})")]
    NonzeroConstant(String),
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
}

/// Free-function form of [`Poly::eval`].
pub fn eval(p: &Poly, x: &[f64]) -> Result<f64, GermError> {
    p.eval(x)
}

/// Free-function form of [`Poly::partial`].
pub fn partial(p: &Poly, m: &MultiIndex) -> Result<Poly, GermError> {
    p.partial(m)
}

/// Free-function form of [`Poly::gradient`].
pub fn gradient(p: &Poly) -> Vec<Poly> {
    p.gradient()
}

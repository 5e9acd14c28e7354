use thiserror::Error;

/// Errors raised by the approachability toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("dimension {dim} exceeds the supported maximum {max} for {what}")]
    DimensionGuard {
        what: &'static str,
        dim: usize,
        max: usize,
    },
    #[error("enumeration of {count} candidates exceeds the guard {max}")]
    EnumerationGuard { count: u128, max: u128 },
    #[error("linear program failed: {0}")]
    Lp(&'static str),
    #[error("payoff norm {norm} exceeds the bound {bound}")]
    NormViolation { norm: f64, bound: f64 },
    #[error("signal vector is not in the feasible set (distance {0:e})")]
    OutsideFeasibleSet(f64),
    #[error("payoff map is not bi-piecewise linear: {0}; use the general_games surrogate")]
    NotBiPiecewiseLinear(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

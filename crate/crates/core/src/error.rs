use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("matrix has determinant {0}, expected 1")]
    Determinant(i64),

    #[error("linear part {0} is not a unit of Z[omega]")]
    NotAUnit(String),

    #[error("not an element of Aut+(R): translation {0} is outside the sublattice R")]
    NotInAutR(String),

    #[error("degenerate periods: Im(period2/period1) = {0}")]
    DegeneratePeriods(f64),

    #[error("point lies within {distance:e} of a pole")]
    Pole { distance: f64 },

    #[error("series or iteration failed to converge: {0}")]
    Convergence(String),

    #[error("Newton inversion failed; best residual {best_residual:e}")]
    NonConvergence { best_residual: f64 },

    #[error("denominator {0:e} too small")]
    Degenerate(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

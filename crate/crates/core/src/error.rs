use thiserror::Error;

/// Errors raised by the numerical and combinatorial routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("Schottky condition violated: isometric circles {first} and {second} are not disjoint (gap {gap:.3e})")]
    NotClassicalSchottky {
        first: String,
        second: String,
        gap: f64,
    },

    #[error("{point} is within {distance:.3e} of {pole}")]
    PoleProximity {
        point: String,
        pole: String,
        distance: f64,
    },

    #[error("series did not converge: {what} changed by {change:.3e} between the last two truncation levels (tolerance {tol:.1e})")]
    NonConvergence { what: String, change: f64, tol: f64 },

    #[error("ill-conditioned theta series: largest term {largest:.3e} against result {value:.3e}")]
    ThetaConditioning { largest: f64, value: f64 },

    #[error("theta value {0:.3e} too close to zero")]
    ThetaNearZero(f64),

    #[error("Abel map factor has modulus {0} (expected 1)")]
    NonUnitFactor(f64),

    #[error("patch is not minimal: {0}")]
    NotMinimal(String),

    #[error("angle map rejected: {0}")]
    AngleMap(String),

    #[error("discrete Abel map inconsistent across quad {0}")]
    AbelInconsistent(usize),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// True for failures of a numerical series, product or quadrature to settle.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Quadrature(_) | Error::ThetaConditioning { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

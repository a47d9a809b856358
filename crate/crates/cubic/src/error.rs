use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rotation angle {0} outside [0, pi/4)")]
    AngleOutOfDomain(f64),

    #[error("QR iteration did not converge at submatrix index {index}")]
    NoConvergence { index: usize },

    #[error("{found} of {requested} levels pass the theta-stability filter; angle too small or basis too small")]
    ThetaStability { requested: usize, found: usize },

    #[error("uncertainty {value:e} exceeds ceiling {ceiling:e}")]
    UncertaintyCeiling { value: f64, ceiling: f64 },

    #[error("ambiguous eigenvalue matching near {re} {im:+}i")]
    MatchingAmbiguity { re: f64, im: f64 },

    #[error("floating-point overflow evaluating basis function j={j} at z={re} {im:+}i")]
    Overflow { j: usize, re: f64, im: f64 },

    #[error("only {finite} finite Pade orders, window needs {window}")]
    DefectivePade { finite: usize, window: usize },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("ill-conditioned fit: condition estimate {0:e}")]
    IllConditioned(f64),

    #[error("reconstruction residual {residual:e} above tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("singular tridiagonal solve at row {0}")]
    Singular(usize),
}

impl Error {
    /// True for failures caused by a convergence or uncertainty ceiling, as opposed
    /// to plain numerical breakdown or bad input.
    pub fn is_ceiling(&self) -> bool {
        matches!(
            self,
            Error::UncertaintyCeiling { .. }
                | Error::ThetaStability { .. }
                | Error::Residual { .. }
                | Error::DefectivePade { .. }
        )
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::AngleOutOfDomain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::fmt;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor or operation received a parameter outside its domain.
    InvalidParameter(String),
    /// A survival function was evaluated at a negative time.
    NegativeTime(f64),
    /// An integrand sampled during quadrature violated monotonicity.
    NonMonotoneInput { at: f64 },
    /// Adaptive quadrature could not locate a finite integration range or
    /// exhausted its subdivision budget.
    QuadratureDidNotConverge { upper_limit: f64 },
    /// A by-mass truncation would require more terms than the retention cap.
    TruncationLimit { terms: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NegativeTime(t) => write!(f, "time must be nonnegative, got {t}"),
            Error::NonMonotoneInput { at } => {
                write!(f, "integrand is not monotone near y = {at}")
            }
            Error::QuadratureDidNotConverge { upper_limit } => {
                write!(f, "quadrature did not converge (upper limit {upper_limit})")
            }
            Error::TruncationLimit { terms } => {
                write!(f, "truncation would retain more than {terms} terms")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The function has a pole at the requested argument.
    #[error("{function} has a pole at {at}")]
    Pole { function: &'static str, at: f64 },

    /// Argument outside the domain of the function (including NaN/inf).
    #[error("{function}: argument {value} outside domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A regularized density is singular at a boundary point.
    #[error("{quantity} is singular at theta = {theta} (boundary point)")]
    Singularity { quantity: &'static str, theta: f64 },

    /// The requested integral diverges; carries the expected divergence law.
    #[error("divergent: {0}")]
    Divergent(String),

    /// Generic invalid input to a constructor or operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature could not meet its tolerance.
    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    /// A log-log fit could not be formed from the supplied window.
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(function: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            function,
            value,
            reason: "not finite",
        })
    }
}

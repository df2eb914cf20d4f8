use thiserror::Error;

/// Errors produced by the numerical kernels, models and file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A special function would overflow `f64` at the requested argument.
    #[error("overflow: {function} at {argument} exceeds the stable range ({bound})")]
    Overflow {
        function: &'static str,
        argument: String,
        bound: String,
    },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         |estimate| = {estimate_norm:e}, achieved error {achieved_error:e} > requested {requested_error:e}"
    )]
    Convergence {
        estimate_norm: f64,
        achieved_error: f64,
        requested_error: f64,
        subdivisions: usize,
    },

    /// The optimizer never saw a finite objective value.
    #[error("optimization failed: {0}")]
    Optimization(String),

    /// Malformed configuration, matrix or result file content.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// Two result sets could not be compared.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let location = e
            .position()
            .map(|p| format!("line {}", p.line()))
            .unwrap_or_else(|| "csv".to_string());
        Error::parse(location, e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

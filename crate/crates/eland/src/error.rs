use thiserror::Error;

/// Errors produced by the solvers and front end.
///
/// The CLI maps these onto exit codes: usage/config errors exit with 2,
/// numeric failures with 3, and invariant violations detected in emitted
/// results with 1.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural assumption on the potential does not hold.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// An iterative method failed to converge or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Not enough samples to perform a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed configuration or command-line input.
    #[error("config error: {0}")]
    Config(String),

    /// A requested diagnostic is undefined for the given solution.
    #[error("diagnostic undefined: {0}")]
    DiagnosticUndefined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A grid or integration window does not cover the support of the integrand.
    #[error("coverage error: {message} (required span {required:.6e}, available {available:.6e})")]
    Coverage {
        message: String,
        required: f64,
        available: f64,
    },

    /// An operation would populate Fock states beyond the photon cutoff.
    #[error("truncation overflow: {0}")]
    TruncationOverflow(String),

    /// A requested feature lies outside what the implementation supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// A dipole channel label was not found on the matter system.
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    /// A channel lacks the raising/lowering split required by the request.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Gate kinds do not match the requested signal.
    #[error("gate kind mismatch: {0}")]
    GateKind(String),

    /// Reading or writing a data file failed.
    #[error("i/o error: {0}")]
    Io(String),

    /// A data file could not be parsed.
    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

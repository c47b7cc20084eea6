use thiserror::Error;

/// Errors raised by the entropy toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlfError {
    /// A density matrix, partition or probability vector failed an invariant.
    #[error("validation failed ({invariant}): deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    Validation {
        invariant: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A dense or enumeration cap would be exceeded.
    #[error("size cap exceeded: {what} needs {required}, cap is {cap}")]
    CapExceeded { what: String, required: u128, cap: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The chain is reducible; carries the strongly connected components.
    #[error("chain is reducible: strongly connected components {components:?}")]
    Reducible { components: Vec<Vec<usize>> },

    #[error("chain is not primitive (period {period})")]
    NotPrimitive { period: usize },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),

    /// Internal consistency violation, e.g. a coarse-graining that is not lumpable.
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl From<std::io::Error> for AlfError {
    fn from(e: std::io::Error) -> Self {
        AlfError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for AlfError {
    fn from(e: serde_json::Error) -> Self {
        AlfError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AlfError>;

use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("flat dimension {requested} exceeds the configured cap {cap}")]
    DimensionOverflow { requested: u128, cap: usize },

    #[error("enumeration of {requested} items exceeds the configured cap {cap}")]
    EnumerationTooLarge { requested: u128, cap: usize },

    #[error("register index {index} out of range for {registers} registers")]
    BadRegisterIndex { index: usize, registers: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("eigendecomposition did not converge")]
    EigsFailed,

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("type is not collision-free")]
    NotCollisionFree,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid parameters: {0}")]
    ParameterError(String),
}

impl Error {
    /// Short stable identifier, used when an error is recorded in a report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionOverflow { .. } => "DimensionOverflow",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::BadRegisterIndex { .. } => "BadRegisterIndex",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::EigsFailed => "EigsFailed",
            Error::NotPsd(_) => "NotPSD",
            Error::NotUnitary(_) => "NotUnitary",
            Error::NotCollisionFree => "NotCollisionFree",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::ParameterError(_) => "ParameterError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

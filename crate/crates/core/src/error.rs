use thiserror::Error;

/// Errors raised by the laboratory. Each variant maps to a distinct CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no singular gap at index {index} (gap {gap:e})")]
    Gap { index: usize, gap: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("support of {0} points exceeds the memory guard")]
    MemoryGuard(usize),

    #[error("distribution is periodic with period {0}")]
    Periodic(u64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code; 1 and 2 are left to the runtime and argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 3,
            Error::Precondition(_) => 4,
            Error::DimensionMismatch { .. } => 5,
            Error::Gap { .. } => 6,
            Error::MemoryGuard(_) => 7,
            Error::Periodic(_) => 8,
            Error::Numerical(_) => 9,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 10,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

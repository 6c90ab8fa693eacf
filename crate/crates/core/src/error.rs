use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("x = {x} lies beyond the validity boundary {boundary}")]
    Range { x: f64, boundary: f64 },
    #[error("solver failed: {message} (last residual {residual:e})")]
    Solver { message: String, residual: f64 },
    #[error("classification failed: {0}")]
    Classification(String),
    #[error("logic error: {0}")]
    Logic(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("unsupported construction: {0}")]
    Unsupported(String),
    #[error("construction undefined at epsilon = {epsilon}: {reason}")]
    Undefined { epsilon: f64, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn solver(message: impl Into<String>, residual: f64) -> Self {
        Error::Solver { message: message.into(), residual }
    }
}

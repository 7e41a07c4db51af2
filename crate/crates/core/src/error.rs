use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical blow-up at t = {t}")]
    Blowup { t: f64 },

    #[error("step size {dt} exceeds the stability limit {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("projected wall time {projected_s:.1}s exceeds the budget of {cap_s:.1}s")]
    Budget { projected_s: f64, cap_s: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

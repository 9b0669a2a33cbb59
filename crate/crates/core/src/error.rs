use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("trace error: {0}")]
    Trace(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

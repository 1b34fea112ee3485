use thiserror::Error;

/// Errors produced by parsing, encoding, and the numeric pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular matrix for pair ({i}, {j}): {detail}")]
    Singular { i: usize, j: usize, detail: String },

    #[error("did not converge after {iterations} iterations (last change {last_change})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code class: 2 for data errors, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format(_)
            | Error::EmptyInput
            | Error::DegenerateData(_)
            | Error::Input(_)
            | Error::Parameter(_)
            | Error::Io(_) => 2,
            Error::Numeric(_) | Error::Singular { .. } | Error::NonConvergence { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: model manifolds need N >= 2")]
    InvalidDimension(usize),

    #[error("{what} is singular at the pole r = 0")]
    PoleSingularity { what: &'static str },

    #[error("quadrature did not reach relative tolerance {tol:e} within {evaluations} evaluations (best estimate {best})")]
    ToleranceNotMet {
        best: f64,
        tol: f64,
        evaluations: usize,
    },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("invalid Lebesgue exponent p = {0}: need p > 1")]
    InvalidExponent(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("discretization failure: {0}")]
    Discretization(String),

    #[error("integrator overflow at r = {r} even after rescaling")]
    Overflow { r: f64 },

    #[error("no data to plot: {0}")]
    NoData(String),

    #[error("config error at `{key}`{}: {message}", location(*line, *column))]
    Config {
        key: String,
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" (line {l}, column {c})"),
        (Some(l), None) => format!(" (line {l})"),
        _ => String::new(),
    }
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

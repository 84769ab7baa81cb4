use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unsupported boost level {0} (expected 1, 2 or 3)")]
    UnsupportedBoost(u32),

    #[error("{0}")]
    Unsupported(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numeric non-convergence: {0}")]
    NonConvergence(String),

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("graph parse error on line {line}: {message}")]
    GraphParse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(invalid(name, format!("{value} is not a probability")))
    }
}

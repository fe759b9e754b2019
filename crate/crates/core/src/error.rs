use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Snapshot of a minimizer run that stopped before converging.
#[derive(Debug, Clone)]
pub struct IterateDiagnostics {
    pub iterations: usize,
    pub energy: f64,
    pub gradient_norm: f64,
    /// Last accepted iterate, one `dim`-vector per vertex.
    pub last_values: Vec<f64>,
}

impl fmt::Display for IterateDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, energy {:.6e}, gradient norm {:.3e}",
            self.iterations, self.energy, self.gradient_norm
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scaling: {0}")]
    InvalidScaling(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("inadmissible state: {0}")]
    InadmissibleState(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("minimizer did not converge: {0}")]
    Convergence(Box<IterateDiagnostics>),

    #[error("ill-posed functional: {0}")]
    IllPosed(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line} (key `{key}`): {message}")]
    Parse { line: usize, key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

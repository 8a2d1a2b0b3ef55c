use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("random regular generation gave up after {attempts} pairings (n={n}, d={d})")]
    Generation { n: usize, d: usize, attempts: usize },

    /// The iterative eigensolver hit its iteration cap. Carries the best
    /// estimate of lambda so far and its Ritz residual bound.
    #[error("eigensolver did not converge in {iterations} iterations (estimate {estimate}, residual {residual})")]
    Numerical {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

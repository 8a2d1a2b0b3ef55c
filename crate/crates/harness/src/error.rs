use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] perco_core::Error),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("acceptance check failed: {0}")]
    CheckFailed(String),
}

impl HarnessError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(perco_core::Error::Numerical { .. }) => 2,
            HarnessError::CheckFailed(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let numerical = perco_core::Error::Numerical { estimate: 1.0, residual: 0.5, iterations: 10 };
        assert_eq!(HarnessError::from(numerical).exit_code(), 2);
        assert_eq!(HarnessError::CheckFailed("x".into()).exit_code(), 3);
        assert_eq!(HarnessError::Input("x".into()).exit_code(), 1);
        assert_eq!(HarnessError::from(perco_core::Error::Input("x".into())).exit_code(), 1);
    }
}

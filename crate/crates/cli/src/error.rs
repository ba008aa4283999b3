use crate::config::ConfigError;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical abort: {0}")]
    Numerical(fdnls_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration errors, 3 for numerical aborts, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<fdnls_core::Error> for CliError {
    /// Precondition failures surface as configuration errors naming the key.
    fn from(e: fdnls_core::Error) -> Self {
        use fdnls_core::Error as E;
        match e {
            E::InvalidParameter { name, reason } => CliError::Config(ConfigError::OutOfRange {
                key: name.to_string(),
                value: "(see reason)".into(),
                expected: reason,
            }),
            E::StabilityGuard { product, limit } => CliError::Config(ConfigError::OutOfRange {
                key: "dt".into(),
                value: format!("dt·|εℒ| = {product:.4}"),
                expected: format!("dt·|εℒ| <= {limit}"),
            }),
            E::Unsupported(reason) => CliError::Config(ConfigError::Incompatible { reason }),
            other => CliError::Numerical(other),
        }
    }
}

use std::path::{Path, PathBuf};

/// Failures of the front-end, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 config or input, 3 numerical, 4 integrity.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Integrity(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<leakrb_core::Error> for CliError {
    fn from(e: leakrb_core::Error) -> Self {
        use leakrb_core::Error as E;
        let msg = e.to_string();
        match e {
            E::NotCptp { .. }
            | E::NotUnitary { .. }
            | E::MixesSubspaces { .. }
            | E::Integrity(_)
            | E::TransitionInvariant(_) => CliError::Integrity(msg),
            E::NoConvergence { .. } | E::DegenerateFit(_) => CliError::Numerical(msg),
            E::DimensionMismatch { .. }
            | E::NotSquare { .. }
            | E::InvalidArgument(_)
            | E::CombinatorialLimit { .. }
            | E::NonUniformSpacing
            | E::TooFewSamples { .. } => CliError::Config(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::path::PathBuf;

/// Errors of the command-line layer. Input problems map to exit status 2,
/// computational failures to 1.
#[derive(Debug, thiserror::Error)]
pub enum KitError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    InvalidFile { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cone_metric_core::Error),
}

impl KitError {
    pub fn exit_code(&self) -> i32 {
        use cone_metric_core::Error as E;
        match self {
            KitError::Core(
                E::DimensionMismatch { .. }
                | E::NonFinite
                | E::InvalidCone(_)
                | E::InvalidNorm(_)
                | E::InvalidArgument(_)
                | E::InvalidCoefficients(_)
                | E::LabelMismatch,
            ) => 2,
            KitError::Core(_) => 1,
            _ => 2,
        }
    }
}

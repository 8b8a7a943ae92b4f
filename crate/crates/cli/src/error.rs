use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Failures grouped by process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input files (exit 2).
    #[error("input error: {0}")]
    Input(String),
    /// Degenerate slices, singular geometry and similar numeric failures (exit 3).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Invalid flags or configuration values (exit 4).
    #[error("config error: {0}")]
    Config(String),
}

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }
}

impl From<section_pursuit::Error> for CliError {
    fn from(e: section_pursuit::Error) -> Self {
        use section_pursuit::Error as E;
        match e {
            E::DegenerateBasis
            | E::NotOrthonormal { .. }
            | E::EmptyDistribution
            | E::SampleTooSmall { .. }
            | E::DegenerateSlice { .. }
            | E::NoStructure
            | E::SingularAngle { .. } => CliError::Numeric(e.to_string()),
            E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::GridMismatch { .. } | E::NothingToSample { .. } => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("invalid JSON: {e}"))
    }
}

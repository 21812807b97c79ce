use thiserror::Error;

/// Errors shared by every stage of the pipeline.
///
/// Each variant carries a stable machine-parsable code (see [`Error::code`])
/// so callers such as the CLI can report failures without string matching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid fixation event at index {index}: {reason}")]
    InvalidEvent { index: usize, reason: String },

    #[error("degenerate truth: {0}")]
    DegenerateTruth(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "E_GEOMETRY",
            Error::InvalidKernel(_) => "E_KERNEL",
            Error::InvalidInput(_) => "E_INPUT",
            Error::InvalidEvent { .. } => "E_EVENT",
            Error::DegenerateTruth(_) => "E_TRUTH",
            Error::InvalidScenario(_) => "E_SCENARIO",
            Error::InvalidConfig(_) => "E_CONFIG",
            Error::Format { .. } => "E_FORMAT",
            Error::Parse { .. } => "E_PARSE",
            Error::Io(_) => "E_IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

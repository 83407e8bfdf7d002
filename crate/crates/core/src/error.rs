use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyText: {0}")]
    EmptyText(String),
    #[error("EmptyToken: cannot count syllables of an empty token")]
    EmptyToken,
    #[error("NoText: {0}")]
    NoText(String),
    #[error("MissingComplex: article {article_id} has no level-0 version")]
    MissingComplex { article_id: String },
    #[error("InvalidRating: {0}")]
    InvalidRating(String),
    #[error("NoReference: at least one reference is required")]
    NoReference,
    #[error("NoSamples: {0}")]
    NoSamples(String),
    #[error("DegenerateLabels: training data contains only label {0}")]
    DegenerateLabels(u8),
    #[error("ModeMismatch: {0}")]
    ModeMismatch(String),
    #[error("InvalidLoss: {0}")]
    InvalidLoss(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("BackendUnavailable: {0}")]
    BackendUnavailable(String),
    #[error("ProtocolViolation: {0}")]
    ProtocolViolation(String),
    #[error("BackendRejected: {op} failed with {error}")]
    BackendRejected { op: String, error: String },
    #[error("ConfigError: {0}")]
    Config(String),
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable name printed by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyText(_) => "EmptyText",
            Error::EmptyToken => "EmptyToken",
            Error::NoText(_) => "NoText",
            Error::MissingComplex { .. } => "MissingComplex",
            Error::InvalidRating(_) => "InvalidRating",
            Error::NoReference => "NoReference",
            Error::NoSamples(_) => "NoSamples",
            Error::DegenerateLabels(_) => "DegenerateLabels",
            Error::ModeMismatch(_) => "ModeMismatch",
            Error::InvalidLoss(_) => "InvalidLoss",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::BackendUnavailable(_) => "BackendUnavailable",
            Error::ProtocolViolation(_) => "ProtocolViolation",
            Error::BackendRejected { .. } => "BackendRejected",
            Error::Config(_) => "ConfigError",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

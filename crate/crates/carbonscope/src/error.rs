use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. `Schema` carries the JSON key path of the
/// offending field so config mistakes are directly actionable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("failed to parse {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("cyclic `extends` chain involving `{0}`")]
    CyclicExtends(String),

    #[error("unknown platform `{0}` referenced")]
    UnknownPlatform(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("grid must be strictly increasing with at least 2 points")]
    InvalidGrid,

    #[error("validation tolerance failure: {0}")]
    ValidationFailure(String),
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ValidationFailure(_) => 3,
            _ => 2,
        }
    }
}

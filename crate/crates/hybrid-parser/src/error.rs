use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid node reference: {0}")]
    InvalidReference(String),

    #[error("ill-formed phrase: {0}")]
    IllFormedPhrase(String),

    #[error("non-projective subgraph under {0}")]
    NonProjective(String),

    #[error("illegal transition {0}")]
    IllegalTransition(String),

    #[error("invalid graph: {0}")]
    Invalid(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("mismatched sentences: {0}")]
    Mismatch(String),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("event is empty")]
    EmptyEvent,

    #[error("duplicate member `{0}` in event")]
    DuplicateMember(String),

    #[error("variable id {id} is outside a vocabulary of {size}")]
    UnknownVariable { id: usize, size: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("variable `{0}` is already present")]
    DuplicateVariable(String),

    #[error("vocabularies differ: {0}")]
    VocabularyMismatch(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no parseable lines in input")]
    EmptyDataset,

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed reference: {0}")]
    Reference(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("word {word} has no context counts")]
    EmptyRow { word: u32 },

    #[error("negative probability at index {index}")]
    NegativeProbability { index: usize },

    #[error("co-occurrence count overflow for word {word}, context {context}")]
    CountOverflow { word: u32, context: u32 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("cannot draw {requested} negatives, only {available} eligible words")]
    TooManyNegatives { requested: usize, available: usize },

    #[error("non-finite {what} (learning rate too high?)")]
    NonFinite { what: &'static str },

    #[error("svd did not converge after {iterations} iterations (max residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no evaluation item is covered by the vocabulary")]
    NoCoverage,

    #[error("phrase does not occur in the corpus")]
    ZeroOccurrences,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

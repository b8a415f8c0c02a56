//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path} row {row}: {message}")]
    MalformedRow {
        path: PathBuf,
        row: u64,
        message: String,
    },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: {message}")]
    InvalidFormat { path: PathBuf, message: String },

    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),

    #[error("duplicate sentence_id `{0}`")]
    DuplicateSentenceId(String),

    #[error("document `{doc_id}` has no text after loading")]
    EmptyDocument { doc_id: String },

    #[error("document `{doc_id}` has year {year} outside [1900, 2100]")]
    YearOutOfRange { doc_id: String, year: i64 },

    #[error("invalid filter policy: {0}")]
    InvalidFilterPolicy(String),

    #[error("EMPTY_LEXICON: {path} contains no terms")]
    EmptyLexicon { path: PathBuf },

    #[error("invalid label `{0}` (expected AI or NON_AI)")]
    InvalidLabel(String),

    #[error("INSUFFICIENT_NEGATIVES: {non_ai} NON_AI sentences cannot cover {ai} AI sentences")]
    InsufficientNegatives { ai: usize, non_ai: usize },

    #[error("class {label} has only {count} sentences (need at least {required})")]
    ClassTooSmall {
        label: String,
        count: usize,
        required: usize,
    },

    #[error("test_fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("EMPTY_CORPUS: no tokens found in the training sentences")]
    EmptyCorpus,

    #[error("training data contains a single class; both AI and NON_AI are required")]
    SingleClass,

    #[error("negative feature value {value} at feature {feature}")]
    NegativeFeature { feature: usize, value: f64 },

    #[error("smoothing alpha must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("training diverged at iteration {iteration} (non-finite loss); lower the learning rate")]
    Diverged { iteration: usize },

    #[error("EMPTY_INPUT: {0}")]
    EmptyInput(String),

    #[error("no external score recorded for sentence_id `{0}`")]
    MissingScore(String),

    #[error("probability {value} outside [0, 1] at {path} row {row}")]
    ProbabilityOutOfRange { path: PathBuf, row: u64, value: f64 },

    #[error("sentence has {count} tokens; {op} supports at most {max}")]
    TooManyTokens {
        op: String,
        count: usize,
        max: usize,
    },

    #[error("operation requires a {expected} model, got {actual}")]
    WrongModelKind { expected: String, actual: String },

    #[error("degenerate coalition design: {distinct} distinct coalitions for {players} players (need at least players + 1)")]
    DegenerateDesign { distinct: usize, players: usize },

    #[error("n_samples = {n_samples} too small; kernel estimation needs at least {required}")]
    TooFewSamples { n_samples: usize, required: usize },

    #[error("ZERO_VARIANCE: {axis} values are all equal; correlation is undefined")]
    ZeroVariance { axis: String },

    #[error("no year satisfies the temporal evaluation precondition (each class present)")]
    NoEvaluableYears,

    #[error("EMPTY_SUITE: {path} contains no cases")]
    EmptySuite { path: PathBuf },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the underlying cause is an operating-system I/O failure.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

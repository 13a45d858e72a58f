use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point index {index} out of range for {n} points")]
    Index { index: usize, n: usize },

    #[error("invalid query #{query}: {reason}")]
    InvalidQuery { query: usize, reason: String },

    #[error("invalid label #{query}: {reason}")]
    InvalidLabel { query: usize, reason: String },

    #[error("label vector has {labels} entries but there are {queries} queries")]
    LabelCount { labels: usize, queries: usize },

    #[error("duplicate query #{query} (set allow_duplicates to accept)")]
    DuplicateQuery { query: usize },

    #[error("invalid hypothesis class: {0}")]
    InvalidClass(String),

    #[error("invalid distance model: {0}")]
    InvalidModel(String),

    #[error("distances tie on query #{query}")]
    Tie { query: usize },

    #[error("malformed linear system: {0}")]
    MalformedSystem(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("equality-label branching needs {needed} branches, cap is {cap}")]
    BranchCapExceeded { needed: u128, cap: u64 },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("shattering aborted: labeling #{labeling} could not be decided")]
    AbortedOnUnknown { labeling: u64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported class for crossover: {0}")]
    UnsupportedClass(String),

    #[error("separation rejection limit reached after {attempts} attempts")]
    SeparationRejectionLimit { attempts: u64 },

    #[error("hinge kink within finite-difference step")]
    KinkDetected,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("input is a report emitted by this tool (it carries a manifest), not an input file")]
    ReportNotInput,
}

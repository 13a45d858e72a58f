use std::path::PathBuf;

use contrastive_vc::Error;
use serde_json::{json, Value};
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("cannot read {}: {message}", path.display())]
    Read { path: PathBuf, message: String },

    #[error("cannot write {}: {message}", path.display())]
    Write { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),
}

fn core_kind(e: &Error) -> &'static str {
    match e {
        Error::Index { .. } => "index",
        Error::InvalidQuery { .. } => "invalid_query",
        Error::InvalidLabel { .. } => "invalid_label",
        Error::LabelCount { .. } => "label_count",
        Error::DuplicateQuery { .. } => "duplicate_query",
        Error::InvalidClass(_) => "invalid_class",
        Error::InvalidModel(_) => "invalid_model",
        Error::Tie { .. } => "tie",
        Error::MalformedSystem(_) => "malformed_system",
        Error::CapExceeded(_) => "cap_exceeded",
        Error::BranchCapExceeded { .. } => "branch_cap_exceeded",
        Error::UnsupportedCombination(_) => "unsupported_combination",
        Error::AbortedOnUnknown { .. } => "aborted_on_unknown",
        Error::Dimension(_) => "dimension",
        Error::Domain(_) => "domain",
        Error::UnsupportedClass(_) => "unsupported_class",
        Error::SeparationRejectionLimit { .. } => "separation_rejection_limit",
        Error::KinkDetected => "kink_detected",
        Error::Parse(_) => "parse",
        Error::ReportNotInput => "report_not_input",
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => core_kind(e),
            CliError::NotFound(_) => "not_found",
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::AbortedOnUnknown { .. }) => 3,
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

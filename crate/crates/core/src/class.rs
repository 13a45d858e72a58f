use std::fmt;

use crate::error::{Error, Result};

/// The family of distance functions a labeling must be realized in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypothesisClass {
    Arbitrary,
    Metric,
    Lp { p: u32, d: usize },
    Cosine { d: usize },
    Tree,
    ClassPartition,
    /// l2 embeddings whose every labeled far distance exceeds `(1 + alpha)`
    /// times the near one.
    SeparatedL2 { d: usize, alpha: f64 },
}

impl HypothesisClass {
    pub fn validate(self) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidClass(m.to_string()));
        match self {
            HypothesisClass::Lp { p, d } => {
                if p < 1 {
                    return bad("p must be a positive integer");
                }
                if d < 1 {
                    return bad("d must be at least 1");
                }
            }
            HypothesisClass::Cosine { d } if d < 1 => return bad("d must be at least 1"),
            HypothesisClass::SeparatedL2 { d, alpha } => {
                if d < 1 {
                    return bad("d must be at least 1");
                }
                if !(alpha > 0.0 && alpha < 1.0) {
                    return bad("alpha must lie in (0, 1)");
                }
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn name(self) -> &'static str {
        match self {
            HypothesisClass::Arbitrary => "arbitrary",
            HypothesisClass::Metric => "metric",
            HypothesisClass::Lp { .. } => "lp",
            HypothesisClass::Cosine { .. } => "cosine",
            HypothesisClass::Tree => "tree",
            HypothesisClass::ClassPartition => "class_partition",
            HypothesisClass::SeparatedL2 { .. } => "separated_l2",
        }
    }

    /// Whether a checker for this class may answer UNKNOWN.
    pub fn may_be_unknown(self) -> bool {
        match self {
            HypothesisClass::Lp { d, .. } => d > 1,
            HypothesisClass::Cosine { .. } | HypothesisClass::SeparatedL2 { .. } => true,
            _ => false,
        }
    }
}

impl fmt::Display for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypothesisClass::Lp { p, d } => write!(f, "lp(p={p}, d={d})"),
            HypothesisClass::Cosine { d } => write!(f, "cosine(d={d})"),
            HypothesisClass::SeparatedL2 { d, alpha } => {
                write!(f, "separated_l2(d={d}, alpha={alpha})")
            }
            other => f.write_str(other.name()),
        }
    }
}

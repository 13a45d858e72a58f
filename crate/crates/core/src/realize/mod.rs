//! Realizability of a labeled query set within a hypothesis class.

pub mod arbitrary;
pub mod line;
pub mod numeric;
pub mod partition;
pub mod tree;

pub use arbitrary::{realize_arbitrary, PairDigraph};
pub use line::{realize_l1_ordered, realize_line};
pub use numeric::{realize_embedding_numeric, NumericConfig, NumericTarget};
pub use partition::realize_class_partition;
pub use tree::{realize_tree, topologies, Topology};

use crate::class::HypothesisClass;
use crate::error::{Error, Result};
use crate::query::{Label, QueryKind, QuerySet};
use crate::verdict::FeasibilityVerdict;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizeConfig {
    pub line_cap: usize,
    pub tree_cap: usize,
    pub branch_cap: u64,
    /// Use the exact per-coordinate ordering enumeration for odd `p` and
    /// `d > 1` (implemented for `p = 1`, `n * d <= multi_cap`).
    pub exact_odd_p: bool,
    pub multi_cap: usize,
    pub numeric: NumericConfig,
}

impl Default for RealizeConfig {
    fn default() -> Self {
        RealizeConfig {
            line_cap: line::DEFAULT_LINE_CAP,
            tree_cap: tree::DEFAULT_TREE_CAP,
            branch_cap: partition::DEFAULT_BRANCH_CAP,
            exact_odd_p: false,
            multi_cap: line::DEFAULT_MULTI_CAP,
            numeric: NumericConfig::default(),
        }
    }
}

/// Route to the exact checker for the class when there is one, else to the
/// numeric search. k-negative tuples are first lowered to the triplets
/// "positive beats each negative".
pub fn realize(
    qs: &QuerySet,
    labels: &[Label],
    class: HypothesisClass,
    cfg: &RealizeConfig,
) -> Result<FeasibilityVerdict> {
    let class = class.validate()?;
    if let QueryKind::KNegative(_) = qs.kind() {
        let (lowered, lowered_labels) = qs.lower_to_triplets(labels)?;
        return realize(&lowered, &lowered_labels, class, cfg);
    }
    match class {
        HypothesisClass::Arbitrary => realize_arbitrary(qs, labels, false),
        HypothesisClass::Metric => realize_arbitrary(qs, labels, true),
        HypothesisClass::ClassPartition => {
            realize_class_partition(qs, labels, cfg.branch_cap)
        }
        HypothesisClass::Tree => realize_tree(qs, labels, cfg.tree_cap),
        HypothesisClass::Lp { p, d: 1 } => realize_line(qs, labels, p, cfg.line_cap),
        HypothesisClass::Lp { p, d } if cfg.exact_odd_p && p % 2 == 1 => {
            if p != 1 {
                return Err(Error::UnsupportedCombination(format!(
                    "exact odd-p checking in d > 1 is linear only for p = 1 (got p = {p})"
                )));
            }
            realize_l1_ordered(qs, labels, d, cfg.multi_cap)
        }
        HypothesisClass::Lp { p, d } => {
            realize_embedding_numeric(qs, labels, NumericTarget::Lp { p, d }, &cfg.numeric)
        }
        HypothesisClass::Cosine { d } => {
            realize_embedding_numeric(qs, labels, NumericTarget::Cosine { d }, &cfg.numeric)
        }
        HypothesisClass::SeparatedL2 { d, alpha } => realize_embedding_numeric(
            qs,
            labels,
            NumericTarget::Separated { d, alpha },
            &cfg.numeric,
        ),
    }
}

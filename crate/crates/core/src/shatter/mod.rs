//! Shattering checks, dimension probes and the explicit shattered families.

pub mod construct;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::class::HypothesisClass;
use crate::error::{Error, Result};
use crate::query::{Label, LabelVector, Query, QueryKind, QuerySet};
use crate::realize::{realize, RealizeConfig};
use crate::seed::child_rng;
use crate::verdict::Status;

pub const DEFAULT_LABELING_CAP: u64 = 1 << 20;

/// What to do with a labeling the checker cannot decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownPolicy {
    TreatAsRefuted,
    Abort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShatterConfig {
    pub labeling_cap: u64,
    /// Required when the class checker may answer UNKNOWN.
    pub unknown: Option<UnknownPolicy>,
    /// Natarajan label pairs `(f1, f2)` per k-negative query; defaults to
    /// candidates 0 and 1.
    pub natarajan: Option<Vec<(usize, usize)>>,
    pub realize: RealizeConfig,
}

impl Default for ShatterConfig {
    fn default() -> Self {
        ShatterConfig {
            labeling_cap: DEFAULT_LABELING_CAP,
            unknown: None,
            natarajan: None,
            realize: RealizeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShatterReport {
    pub queries: QuerySet,
    pub shattered: bool,
    pub refuter: Option<LabelVector>,
    /// Status of the refuting labeling (UNSAT, or UNKNOWN treated as refuted).
    pub refuter_status: Option<Status>,
    pub labelings_checked: u64,
    pub natarajan_pairs: Option<Vec<(usize, usize)>>,
}

impl ShatterReport {
    pub fn to_json(&self) -> Value {
        json!({
            "queries": self.queries.len(),
            "shattered": self.shattered,
            "refuter": self.refuter.as_ref().map(|l| labels_json(l)),
            "refuter_status": self.refuter_status,
            "labelings_checked": self.labelings_checked,
            "natarajan_pairs": self.natarajan_pairs,
        })
    }
}

pub fn labels_json(labels: &[Label]) -> Vec<Value> {
    labels
        .iter()
        .map(|l| match l {
            Label::Positive(i) => json!(i),
            Label::Equal => json!("eq"),
        })
        .collect()
}

/// Labeling number `bits` of `m` queries: query 0 reads the most significant
/// bit; bit 0 picks `pairs[i].0`, bit 1 picks `pairs[i].1`.
pub fn labeling(bits: u64, pairs: &[(usize, usize)]) -> LabelVector {
    let m = pairs.len();
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(f1, f2))| {
            if bits >> (m - 1 - i) & 1 == 0 {
                Label::Positive(f1)
            } else {
                Label::Positive(f2)
            }
        })
        .collect()
}

fn label_pairs(qs: &QuerySet, custom: Option<&Vec<(usize, usize)>>) -> Result<Vec<(usize, usize)>> {
    let m = qs.len();
    let Some(pairs) = custom else {
        return Ok(vec![(0, 1); m]);
    };
    if pairs.len() != m {
        return Err(Error::LabelCount {
            labels: pairs.len(),
            queries: m,
        });
    }
    let candidates = qs.kind().candidate_count();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if a == b || a >= candidates || b >= candidates {
            return Err(Error::InvalidLabel {
                query: i,
                reason: format!("label pair ({a}, {b}) must be two distinct candidates"),
            });
        }
    }
    Ok(pairs.clone())
}

/// Enumerate every labeling (or every `(f1, f2)` mixture for k-negative
/// queries) in lexicographic order and realize each; the refuter is the
/// first labeling that fails.
pub fn is_shattered(
    qs: &QuerySet,
    class: HypothesisClass,
    cfg: &ShatterConfig,
) -> Result<ShatterReport> {
    let class = class.validate()?;
    let m = qs.len();
    let total: u64 = 1u64
        .checked_shl(m as u32)
        .filter(|&t| t <= cfg.labeling_cap && m < 64)
        .ok_or_else(|| {
            Error::CapExceeded(format!(
                "2^{m} labelings exceed the cap of {}",
                cfg.labeling_cap
            ))
        })?;
    let may_be_unknown = class.may_be_unknown()
        && !(cfg.realize.exact_odd_p && matches!(class, HypothesisClass::Lp { p: 1, .. }));
    if may_be_unknown && cfg.unknown.is_none() {
        return Err(Error::UnsupportedCombination(format!(
            "{class} may leave labelings undecided; choose an unknown-labeling policy"
        )));
    }
    let natarajan = matches!(qs.kind(), QueryKind::KNegative(_));
    if cfg.natarajan.is_some() && !natarajan {
        return Err(Error::UnsupportedCombination(
            "label pairs apply to k-negative queries only".into(),
        ));
    }
    let pairs = label_pairs(qs, cfg.natarajan.as_ref())?;

    let first_failure = (0..total)
        .into_par_iter()
        .map(|bits| {
            let labels = labeling(bits, &pairs);
            realize(qs, &labels, class, &cfg.realize).map(|v| (bits, v.status()))
        })
        .find_first(|r| !matches!(r, Ok((_, Status::Sat))));

    let report = |refuter: Option<(u64, Status)>| ShatterReport {
        queries: qs.clone(),
        shattered: refuter.is_none(),
        refuter: refuter.map(|(bits, _)| labeling(bits, &pairs)),
        refuter_status: refuter.map(|(_, s)| s),
        labelings_checked: refuter.map_or(total, |(bits, _)| bits + 1),
        natarajan_pairs: natarajan.then(|| pairs.clone()),
    };
    match first_failure {
        None => Ok(report(None)),
        Some(Err(e)) => Err(e),
        Some(Ok((bits, Status::Unknown))) if cfg.unknown == Some(UnknownPolicy::Abort) => {
            Err(Error::AbortedOnUnknown { labeling: bits })
        }
        Some(Ok(found)) => Ok(report(Some(found))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcSearchReport {
    /// Largest set certified shattered; a lower bound on the dimension.
    pub best: QuerySet,
    pub restarts: usize,
    pub candidates: usize,
}

impl VcSearchReport {
    pub fn size(&self) -> usize {
        self.best.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lower_bound": self.best.len(),
            "queries": self.best.queries().iter().map(Query::to_tuple).collect::<Vec<_>>(),
            "restarts": self.restarts,
            "candidates": self.candidates,
        })
    }
}

/// Greedy search for a large shattered triplet set over `0..n`.
///
/// Restart 0 scans the candidate triplets `(x, a, b)`, `a < b`, in
/// lexicographic order; later restarts scan a seeded shuffle. A candidate is
/// kept when the set stays shattered. UNKNOWN labelings count as refuted.
pub fn vc_search(
    n: usize,
    class: HypothesisClass,
    max_queries: usize,
    budget: usize,
    seed: u64,
    cfg: &ShatterConfig,
) -> Result<VcSearchReport> {
    if n < 3 {
        return Err(Error::Domain("a triplet needs at least 3 points".into()));
    }
    if n > 8 {
        return Err(Error::CapExceeded(format!("dimension search covers n <= 8, got {n}")));
    }
    let mut candidates = Vec::new();
    for x in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if x != a && x != b {
                    candidates.push(Query::triplet(x, a, b));
                }
            }
        }
    }
    let cfg = ShatterConfig {
        unknown: Some(UnknownPolicy::TreatAsRefuted),
        ..cfg.clone()
    };
    let mut best = QuerySet::new(n, QueryKind::Triplet, vec![])?;
    for restart in 0..budget.max(1) {
        let mut order = candidates.clone();
        if restart > 0 {
            order.shuffle(&mut child_rng(seed, restart as u64));
        }
        let mut current = QuerySet::new(n, QueryKind::Triplet, vec![])?;
        for q in order {
            if current.len() >= max_queries {
                break;
            }
            let mut trial = current.clone();
            trial.push(q)?;
            if (1u64 << trial.len()) > cfg.labeling_cap {
                break;
            }
            if is_shattered(&trial, class, &cfg)?.shattered {
                current = trial;
            }
        }
        if current.len() > best.len() {
            best = current;
        }
    }
    Ok(VcSearchReport {
        best,
        restarts: budget.max(1),
        candidates: candidates.len(),
    })
}

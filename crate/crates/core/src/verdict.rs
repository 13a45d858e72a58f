use serde::Serialize;
use serde_json::{json, Value};

use crate::model::DistanceModel;
use crate::query::Pair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

/// Why a labeling is unrealizable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Pairs `p0 -> p1 -> ... -> p0`, each required strictly closer than the next.
    Cycle(Vec<Pair>),
    /// `same` chain joining `different.0` to `different.1` despite a
    /// different-class requirement between them.
    UnionFindConflict {
        chain: Vec<usize>,
        different: (usize, usize),
        branches_refuted: u64,
    },
    /// Every ordering or topology was refuted by the linear checker.
    ExhaustedEnumeration { refuted: u64 },
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Cycle(pairs) => json!({
                "kind": "cycle",
                "pairs": pairs.iter().map(|p| [p.lo(), p.hi()]).collect::<Vec<_>>(),
            }),
            Certificate::UnionFindConflict {
                chain,
                different,
                branches_refuted,
            } => json!({
                "kind": "union_find_conflict",
                "chain": chain,
                "different": [different.0, different.1],
                "branches_refuted": branches_refuted,
            }),
            Certificate::ExhaustedEnumeration { refuted } => json!({
                "kind": "exhausted_enumeration",
                "refuted": refuted,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    status: Status,
    witness: Option<DistanceModel>,
    certificate: Option<Certificate>,
    margin: Option<f64>,
}

impl FeasibilityVerdict {
    pub fn sat(witness: DistanceModel, margin: Option<f64>) -> Self {
        FeasibilityVerdict {
            status: Status::Sat,
            witness: Some(witness),
            certificate: None,
            margin,
        }
    }

    pub fn unsat(certificate: Certificate) -> Self {
        FeasibilityVerdict {
            status: Status::Unsat,
            witness: None,
            certificate: Some(certificate),
            margin: None,
        }
    }

    pub fn unknown() -> Self {
        FeasibilityVerdict {
            status: Status::Unknown,
            witness: None,
            certificate: None,
            margin: None,
        }
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.status == Status::Unsat
    }

    pub fn witness(&self) -> Option<&DistanceModel> {
        self.witness.as_ref()
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn margin(&self) -> Option<f64> {
        self.margin
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "witness": self.witness.as_ref().map(DistanceModel::to_json),
            "certificate": self.certificate.as_ref().map(Certificate::to_json),
            "margin": self.margin,
        })
    }
}

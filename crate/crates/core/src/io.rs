//! JSON input files: labeled query sets, point clouds and simulator sweeps.
//!
//! Reports written by the command-line tool carry a top-level `"manifest"`
//! object. Every parser here refuses such documents with
//! [`Error::ReportNotInput`].

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::jl::validate_points;
use crate::class::HypothesisClass;
use crate::error::{Error, Result};
use crate::query::{Label, LabelVector, Query, QueryKind, QuerySet};
use crate::sim::SweepConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Triplet,
    Quadruplet,
    Knegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    Arbitrary,
    Metric,
    Lp,
    Cosine,
    Tree,
    ClassPartition,
    SeparatedL2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassSpec {
    variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum EqTag {
    #[serde(rename = "eq")]
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum LabelSpec {
    Index(usize),
    Equal(EqTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryFileSpec {
    n: usize,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<ClassSpec>,
    queries: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<LabelSpec>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_duplicates: bool,
}

/// A parsed query file.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryFile {
    pub queries: QuerySet,
    pub class: Option<HypothesisClass>,
    pub labels: Option<LabelVector>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Parse JSON text, refusing tool reports.
fn input_value(text: &str) -> Result<Value> {
    if text.trim_start().starts_with("# manifest:") {
        return Err(Error::ReportNotInput);
    }
    let value: Value = serde_json::from_str(text).map_err(parse_error)?;
    if value.get("manifest").is_some() {
        return Err(Error::ReportNotInput);
    }
    Ok(value)
}

fn class_from_spec(spec: &ClassSpec) -> Result<HypothesisClass> {
    let need = |field: &str, v: Option<usize>| {
        v.ok_or_else(|| Error::InvalidClass(format!("{field} is required for this variant")))
    };
    let extra = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidClass("field not used by this variant".into()))
        }
    };
    let class = match spec.variant {
        Variant::Arbitrary | Variant::Metric | Variant::Tree | Variant::ClassPartition => {
            extra(spec.p.is_none() && spec.d.is_none() && spec.alpha.is_none())?;
            match spec.variant {
                Variant::Arbitrary => HypothesisClass::Arbitrary,
                Variant::Metric => HypothesisClass::Metric,
                Variant::Tree => HypothesisClass::Tree,
                _ => HypothesisClass::ClassPartition,
            }
        }
        Variant::Lp => {
            extra(spec.alpha.is_none())?;
            let p = spec
                .p
                .ok_or_else(|| Error::InvalidClass("p is required for lp".into()))?;
            HypothesisClass::Lp {
                p,
                d: need("d", spec.d)?,
            }
        }
        Variant::Cosine => {
            extra(spec.p.is_none() && spec.alpha.is_none())?;
            HypothesisClass::Cosine { d: need("d", spec.d)? }
        }
        Variant::SeparatedL2 => {
            extra(spec.p.is_none())?;
            HypothesisClass::SeparatedL2 {
                d: need("d", spec.d)?,
                alpha: spec
                    .alpha
                    .ok_or_else(|| Error::InvalidClass("alpha is required for separated_l2".into()))?,
            }
        }
    };
    class.validate()
}

fn spec_from_class(class: HypothesisClass) -> ClassSpec {
    let bare = |variant| ClassSpec {
        variant,
        p: None,
        d: None,
        alpha: None,
    };
    match class {
        HypothesisClass::Arbitrary => bare(Variant::Arbitrary),
        HypothesisClass::Metric => bare(Variant::Metric),
        HypothesisClass::Tree => bare(Variant::Tree),
        HypothesisClass::ClassPartition => bare(Variant::ClassPartition),
        HypothesisClass::Lp { p, d } => ClassSpec {
            p: Some(p),
            d: Some(d),
            ..bare(Variant::Lp)
        },
        HypothesisClass::Cosine { d } => ClassSpec {
            d: Some(d),
            ..bare(Variant::Cosine)
        },
        HypothesisClass::SeparatedL2 { d, alpha } => ClassSpec {
            d: Some(d),
            alpha: Some(alpha),
            ..bare(Variant::SeparatedL2)
        },
    }
}

pub fn parse_query_file(text: &str) -> Result<QueryFile> {
    let spec: QueryFileSpec = serde_json::from_value(input_value(text)?).map_err(parse_error)?;
    let kind = match (spec.kind, spec.k) {
        (KindTag::Triplet, None) => QueryKind::Triplet,
        (KindTag::Quadruplet, None) => QueryKind::Quadruplet,
        (KindTag::Knegative, Some(k)) if k >= 1 => QueryKind::KNegative(k),
        (KindTag::Knegative, _) => {
            return Err(Error::Parse("knegative queries need k >= 1".into()));
        }
        (_, Some(_)) => return Err(Error::Parse("k is only used by knegative queries".into())),
    };
    let queries = spec
        .queries
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Query::from_tuple(kind, t).map_err(|reason| Error::InvalidQuery { query: i, reason })
        })
        .collect::<Result<Vec<_>>>()?;
    let queries = QuerySet::with_duplicates(spec.n, kind, queries, spec.allow_duplicates)?;
    let class = spec.class.as_ref().map(class_from_spec).transpose()?;
    let labels = match spec.labels {
        None => None,
        Some(raw) => {
            let labels: LabelVector = raw
                .into_iter()
                .map(|l| match l {
                    LabelSpec::Index(i) => Label::Positive(i),
                    LabelSpec::Equal(_) => Label::Equal,
                })
                .collect();
            queries.check_labels(&labels, true)?;
            Some(labels)
        }
    };
    Ok(QueryFile {
        queries,
        class,
        labels,
    })
}

impl QueryFile {
    pub fn to_json(&self) -> Value {
        let qs = &self.queries;
        let (kind, k) = match qs.kind() {
            QueryKind::Triplet => (KindTag::Triplet, None),
            QueryKind::Quadruplet => (KindTag::Quadruplet, None),
            QueryKind::KNegative(k) => (KindTag::Knegative, Some(k)),
        };
        let spec = QueryFileSpec {
            n: qs.n(),
            kind,
            k,
            class: self.class.map(spec_from_class),
            queries: qs.queries().iter().map(Query::to_tuple).collect(),
            labels: self.labels.as_ref().map(|ls| {
                ls.iter()
                    .map(|l| match l {
                        Label::Positive(i) => LabelSpec::Index(*i),
                        Label::Equal => LabelSpec::Equal(EqTag::Eq),
                    })
                    .collect()
            }),
            allow_duplicates: qs.allows_duplicates(),
        };
        serde_json::to_value(spec).expect("query file serializes")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsSpec {
    points: Vec<Vec<f64>>,
}

/// `{"points": [[x, y, ...], ...]}` with a shared positive dimension.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let spec: PointsSpec = serde_json::from_value(input_value(text)?).map_err(parse_error)?;
    validate_points(&spec.points)?;
    Ok(spec.points)
}

pub fn points_to_json(points: &[Vec<f64>]) -> Value {
    json!({ "points": points })
}

pub fn parse_sim_config(text: &str) -> Result<SweepConfig> {
    let cfg: SweepConfig = serde_json::from_value(input_value(text)?).map_err(parse_error)?;
    if cfg.seeds.is_empty() || cfg.m_train.is_empty() {
        return Err(Error::Domain("seeds and m_train must be non-empty".into()));
    }
    for run in cfg.runs().iter().take(1) {
        run.validate()?;
    }
    Ok(cfg)
}

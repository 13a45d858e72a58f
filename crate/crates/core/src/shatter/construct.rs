//! Explicit shattered query families with a witness for every labeling.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{
    DistanceMatrix, DistanceModel, Embedding, Geometry, Partition, Rational,
};
use crate::query::{Label, QuerySet};

use super::labeling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `l_p` in dimension `d`: basis points `0..d`, anchors `d..n`.
    Lp { n: usize, d: usize, p: u32 },
    /// Same placement, compared by cosine similarity.
    Cosine { n: usize, d: usize },
    /// Arbitrary (in fact metric) distances on `n` points.
    Arbitrary { n: usize },
    /// Class partitions, one query per disjoint triple.
    Class { n: usize },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lp { n, d, p } => write!(f, "lp(n={n}, d={d}, p={p})"),
            Family::Cosine { n, d } => write!(f, "cosine(n={n}, d={d})"),
            Family::Arbitrary { n } => write!(f, "arbitrary(n={n})"),
            Family::Class { n } => write!(f, "class(n={n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    family: Family,
    queries: QuerySet,
}

fn int(v: usize) -> Rational {
    Rational::from_integer(v.into())
}

impl Construction {
    pub fn new(family: Family) -> Result<Self> {
        let triples: Vec<(usize, usize, usize)> = match family {
            Family::Lp { n, d, p } => {
                if p < 1 {
                    return Err(Error::InvalidClass("p must be a positive integer".into()));
                }
                basis_triples(n, d)?
            }
            Family::Cosine { n, d } => basis_triples(n, d)?,
            Family::Arbitrary { n } => {
                need_three(n)?;
                (0..n)
                    .flat_map(|i| (i + 1..n - 1).map(move |j| (i, j, j + 1)))
                    .collect()
            }
            Family::Class { n } => {
                need_three(n)?;
                (0..n / 3).map(|t| (3 * t, 3 * t + 1, 3 * t + 2)).collect()
            }
        };
        let n = match family {
            Family::Lp { n, .. }
            | Family::Cosine { n, .. }
            | Family::Arbitrary { n }
            | Family::Class { n } => n,
        };
        Ok(Construction {
            family,
            queries: QuerySet::triplets(n, &triples)?,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn queries(&self) -> &QuerySet {
        &self.queries
    }

    /// The closed-form family size.
    pub fn expected_size(&self) -> usize {
        match self.family {
            Family::Lp { n, d, .. } | Family::Cosine { n, d } => (d - 1) * (n - d),
            Family::Arbitrary { n } => (n - 1) * (n - 2) / 2,
            Family::Class { n } => n / 3,
        }
    }

    /// A model inducing `labels` on the family's queries.
    pub fn witness(&self, labels: &[Label]) -> Result<DistanceModel> {
        self.queries.check_labels(labels, false)?;
        let closer_first = |q: usize| labels[q] == Label::FIRST;
        match self.family {
            Family::Lp { n, d, p } => Ok(DistanceModel::Embedding(Embedding::exact(
                Geometry::Lp(p),
                basis_points(n, d, closer_first),
            )?)),
            Family::Cosine { n, d } => Ok(DistanceModel::Embedding(Embedding::exact(
                Geometry::Cosine,
                basis_points(n, d, closer_first),
            )?)),
            Family::Arbitrary { n } => Ok(DistanceModel::Matrix(path_ranks(n, closer_first))),
            Family::Class { n } => {
                let mut class_of = vec![0; n];
                for t in 0..n / 3 {
                    // the anchor and its positive share class 0, the negative is alone in 1
                    let negative = if closer_first(t) { 3 * t + 2 } else { 3 * t + 1 };
                    class_of[negative] = 1;
                }
                Ok(DistanceModel::Partition(Partition::new(class_of, 2)?))
            }
        }
    }
}

fn need_three(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Dimension(format!("need n >= 3, got n = {n}")));
    }
    Ok(())
}

/// Queries `(anchor, 0, j)` for anchors `d..n` and `j` in `1..d`.
fn basis_triples(n: usize, d: usize) -> Result<Vec<(usize, usize, usize)>> {
    if d <= 1 || d >= n {
        return Err(Error::Dimension(format!("need 1 < d < n, got d = {d}, n = {n}")));
    }
    Ok((d..n)
        .flat_map(|x| (1..d).map(move |j| (x, 0, j)))
        .collect())
}

/// Point `j < d` sits at basis vector `e_j`. An anchor has first coordinate
/// 1/2 and coordinate `j` equal to 0 when point 0 must be closer than point
/// `j`, 1 otherwise: the two distances then differ only in `|t_j|^p` versus
/// `|t_j - 1|^p`.
fn basis_points(n: usize, d: usize, closer_first: impl Fn(usize) -> bool) -> Vec<Vec<Rational>> {
    let half = Rational::new(1.into(), 2.into());
    let mut points = Vec::with_capacity(n);
    for j in 0..d {
        let mut e = vec![Rational::zero(); d];
        e[j] = Rational::one();
        points.push(e);
    }
    for (a, _) in (d..n).enumerate() {
        let mut x = vec![Rational::zero(); d];
        x[0] = half.clone();
        for j in 1..d {
            let q = a * (d - 1) + (j - 1);
            if !closer_first(q) {
                x[j] = Rational::one();
            }
        }
        points.push(x);
    }
    points
}

/// For each anchor `i`, orient the path `i+1 - i+2 - ... - n-1` by the labels
/// of `(i, j, j+1)`, rank it topologically and set `rho(i, j) = n + rank`.
fn path_ranks(n: usize, closer_first: impl Fn(usize) -> bool) -> DistanceMatrix {
    let mut value = vec![vec![Rational::zero(); n]; n];
    let mut q = 0;
    for i in 0..n {
        let len = n - i - 1;
        if len == 0 {
            continue;
        }
        // node t stands for point i + 1 + t
        let mut out = vec![Vec::new(); len];
        let mut indegree = vec![0; len];
        for t in 0..len - 1 {
            let (from, to) = if closer_first(q) { (t, t + 1) } else { (t + 1, t) };
            out[from].push(to);
            indegree[to] += 1;
            q += 1;
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..len).filter(|&t| indegree[t] == 0).map(Reverse).collect();
        let mut rank = 1;
        while let Some(Reverse(t)) = ready.pop() {
            let j = i + 1 + t;
            value[i][j] = int(n + rank);
            value[j][i] = int(n + rank);
            rank += 1;
            for &u in &out[t] {
                indegree[u] -= 1;
                if indegree[u] == 0 {
                    ready.push(Reverse(u));
                }
            }
        }
    }
    DistanceMatrix::new(value).expect("symmetric with zero diagonal")
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub family: Family,
    pub queries: usize,
    pub labelings: u64,
    pub labelings_verified: u64,
    /// Arbitrary family: every witness passed the triangle inequality and
    /// stayed within `[n, 2n]`.
    pub metric_verified: Option<bool>,
    /// Cosine family: l2 on the normalized points induced the same labels.
    pub sphere_cross_check: Option<bool>,
}

impl VerifyReport {
    pub fn all_verified(&self) -> bool {
        self.labelings_verified == self.labelings
            && self.metric_verified != Some(false)
            && self.sphere_cross_check != Some(false)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family.to_string(),
            "queries": self.queries,
            "labelings": self.labelings,
            "labelings_verified": self.labelings_verified,
            "metric_verified": self.metric_verified,
            "sphere_cross_check": self.sphere_cross_check,
            "all_verified": self.all_verified(),
        })
    }
}

struct Check {
    labels_ok: bool,
    metric_ok: Option<bool>,
    sphere_ok: Option<bool>,
}

fn in_range(m: &DistanceMatrix) -> bool {
    let n = m.n();
    let (lo, hi) = (int(n), int(2 * n));
    (0..n).all(|i| (0..n).all(|j| i == j || (m.get(i, j) >= &lo && m.get(i, j) <= &hi)))
}

fn sphere_labels(model: &DistanceModel, qs: &QuerySet) -> Result<Vec<Label>> {
    let DistanceModel::Embedding(e) = model else {
        unreachable!("cosine witnesses are embeddings")
    };
    let normalized = e
        .to_f64()
        .into_iter()
        .map(|r| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            r.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    DistanceModel::Embedding(Embedding::float(Geometry::Lp(2), normalized)?).evaluate_labels(qs)
}

/// Build and exactly re-check the witness of every labeling.
pub fn verify(construction: &Construction) -> Result<VerifyReport> {
    let qs = construction.queries();
    let m = qs.len();
    if m >= 31 {
        return Err(Error::CapExceeded(format!("2^{m} labelings")));
    }
    let total = 1u64 << m;
    let pairs = vec![(0, 1); m];
    let checks: Vec<Check> = (0..total)
        .into_par_iter()
        .map(|bits| {
            let labels = labeling(bits, &pairs);
            let model = construction.witness(&labels)?;
            let labels_ok = model.satisfies(qs, &labels);
            let metric_ok = match (&model, construction.family) {
                (DistanceModel::Matrix(mat), Family::Arbitrary { .. }) => {
                    Some(mat.is_metric() && in_range(mat))
                }
                _ => None,
            };
            let sphere_ok = match construction.family {
                Family::Cosine { .. } => Some(sphere_labels(&model, qs)? == labels),
                _ => None,
            };
            Ok(Check {
                labels_ok,
                metric_ok,
                sphere_ok,
            })
        })
        .collect::<Result<_>>()?;
    let is_arbitrary = matches!(construction.family, Family::Arbitrary { .. });
    let is_cosine = matches!(construction.family, Family::Cosine { .. });
    Ok(VerifyReport {
        family: construction.family,
        queries: m,
        labelings: total,
        labelings_verified: checks.iter().filter(|c| c.labels_ok).count() as u64,
        metric_verified: is_arbitrary.then(|| checks.iter().all(|c| c.metric_ok == Some(true))),
        sphere_cross_check: is_cosine.then(|| checks.iter().all(|c| c.sphere_ok == Some(true))),
    })
}

//! Comparison queries over an abstract point set `0..n` and their labels.
//!
//! Every labeled query reduces to a list of [`Comparison`]s between unordered
//! point pairs; the exact checkers all work on that reduced form.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Unordered pair of distinct points, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    lo: usize,
    hi: usize,
}

impl Pair {
    /// Panics if `a == b`; callers validate queries first.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "a pair needs two distinct points");
        Pair {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    /// Position of this pair in the lexicographic listing of all pairs of `n` points.
    pub fn index(self, n: usize) -> usize {
        // pairs (0,1)..(0,n-1), (1,2).. : offset of row lo is lo*n - lo*(lo+1)/2
        self.lo * n - self.lo * (self.lo + 1) / 2 + (self.hi - self.lo - 1)
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        let mut rest = index;
        for lo in 0..n {
            let row = n - lo - 1;
            if rest < row {
                return Pair::new(lo, lo + 1 + rest);
            }
            rest -= row;
        }
        panic!("pair index {index} out of range for {n} points");
    }

    pub fn count(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// One constraint between two pair distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `rho(closer) < rho(farther)`
    Less { closer: Pair, farther: Pair },
    /// `rho(left) == rho(right)`; only meaningful for class partitions.
    Equal { left: Pair, right: Pair },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Triplet,
    Quadruplet,
    /// `k` negatives, so every tuple has `k + 1` candidates after the anchor.
    KNegative(usize),
}

impl QueryKind {
    pub fn candidate_count(self) -> usize {
        match self {
            QueryKind::Triplet | QueryKind::Quadruplet => 2,
            QueryKind::KNegative(k) => k + 1,
        }
    }

    pub fn tuple_len(self) -> usize {
        match self {
            QueryKind::Triplet => 3,
            QueryKind::Quadruplet => 4,
            QueryKind::KNegative(k) => k + 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    Triplet {
        anchor: usize,
        first: usize,
        second: usize,
    },
    Quadruplet {
        first: Pair,
        second: Pair,
    },
    KNegative {
        anchor: usize,
        candidates: Vec<usize>,
    },
}

impl Query {
    pub fn triplet(anchor: usize, first: usize, second: usize) -> Self {
        Query::Triplet {
            anchor,
            first,
            second,
        }
    }

    pub fn kind(&self) -> QueryKind {
        match self {
            Query::Triplet { .. } => QueryKind::Triplet,
            Query::Quadruplet { .. } => QueryKind::Quadruplet,
            Query::KNegative { candidates, .. } => {
                QueryKind::KNegative(candidates.len().saturating_sub(1))
            }
        }
    }

    /// Build from the flat tuple used by the file format.
    pub fn from_tuple(kind: QueryKind, tuple: &[usize]) -> std::result::Result<Self, String> {
        if tuple.len() != kind.tuple_len() {
            return Err(format!(
                "expected {} indices, got {}",
                kind.tuple_len(),
                tuple.len()
            ));
        }
        Ok(match kind {
            QueryKind::Triplet => Query::triplet(tuple[0], tuple[1], tuple[2]),
            QueryKind::Quadruplet => {
                if tuple[0] == tuple[1] || tuple[2] == tuple[3] {
                    return Err("a quadruplet pair repeats a point".into());
                }
                Query::Quadruplet {
                    first: Pair::new(tuple[0], tuple[1]),
                    second: Pair::new(tuple[2], tuple[3]),
                }
            }
            QueryKind::KNegative(_) => Query::KNegative {
                anchor: tuple[0],
                candidates: tuple[1..].to_vec(),
            },
        })
    }

    pub fn to_tuple(&self) -> Vec<usize> {
        match self {
            Query::Triplet {
                anchor,
                first,
                second,
            } => vec![*anchor, *first, *second],
            Query::Quadruplet { first, second } => {
                vec![first.lo, first.hi, second.lo, second.hi]
            }
            Query::KNegative { anchor, candidates } => {
                let mut t = Vec::with_capacity(candidates.len() + 1);
                t.push(*anchor);
                t.extend_from_slice(candidates);
                t
            }
        }
    }

    /// The pair distances the label chooses between, in candidate order.
    pub fn candidate_pairs(&self) -> Vec<Pair> {
        match self {
            Query::Triplet {
                anchor,
                first,
                second,
            } => vec![Pair::new(*anchor, *first), Pair::new(*anchor, *second)],
            Query::Quadruplet { first, second } => vec![*first, *second],
            Query::KNegative { anchor, candidates } => {
                candidates.iter().map(|&c| Pair::new(*anchor, c)).collect()
            }
        }
    }

    fn points(&self) -> Vec<usize> {
        self.to_tuple()
    }

    fn validate(&self, n: usize, position: usize) -> Result<()> {
        for p in self.points() {
            if p >= n {
                return Err(Error::Index { index: p, n });
            }
        }
        let bad = |reason: &str| Error::InvalidQuery {
            query: position,
            reason: reason.to_string(),
        };
        match self {
            Query::Triplet {
                anchor,
                first,
                second,
            } => {
                if anchor == first || anchor == second || first == second {
                    return Err(bad("triplet entries must be pairwise distinct"));
                }
            }
            Query::Quadruplet { first, second } => {
                if first == second {
                    return Err(bad("quadruplet compares a pair with itself"));
                }
            }
            Query::KNegative { anchor, candidates } => {
                if candidates.len() < 2 {
                    return Err(bad("k-negative tuple needs at least two candidates"));
                }
                let mut seen = HashSet::new();
                for c in candidates {
                    if c == anchor || !seen.insert(*c) {
                        return Err(bad(
                            "k-negative candidates must be distinct and differ from the anchor",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reduce a labeled query to pair comparisons.
    pub fn comparisons(&self, label: Label) -> Vec<Comparison> {
        let pairs = self.candidate_pairs();
        match label {
            Label::Positive(i) => pairs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &farther)| Comparison::Less {
                    closer: pairs[i],
                    farther,
                })
                .collect(),
            Label::Equal => vec![Comparison::Equal {
                left: pairs[0],
                right: pairs[1],
            }],
        }
    }
}

/// Which candidate a labeled query marks positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Candidate index: triplets and quadruplets use 0/1, k-negative tuples `0..=k`.
    Positive(usize),
    /// Both triplet candidates at equal distance (class partitions only).
    Equal,
}

impl Label {
    pub const FIRST: Label = Label::Positive(0);
    pub const SECOND: Label = Label::Positive(1);

    /// The other binary label; `Equal` maps to itself.
    pub fn flipped(self) -> Label {
        match self {
            Label::Positive(0) => Label::Positive(1),
            Label::Positive(1) => Label::Positive(0),
            other => other,
        }
    }
}

pub type LabelVector = Vec<Label>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    n: usize,
    kind: QueryKind,
    queries: Vec<Query>,
    allow_duplicates: bool,
}

impl QuerySet {
    pub fn new(n: usize, kind: QueryKind, queries: Vec<Query>) -> Result<Self> {
        Self::with_duplicates(n, kind, queries, false)
    }

    pub fn with_duplicates(
        n: usize,
        kind: QueryKind,
        queries: Vec<Query>,
        allow_duplicates: bool,
    ) -> Result<Self> {
        if let QueryKind::KNegative(k) = kind {
            if k == 0 {
                return Err(Error::InvalidQuery {
                    query: 0,
                    reason: "k-negative queries need k >= 1".into(),
                });
            }
        }
        let mut seen = HashSet::new();
        for (i, q) in queries.iter().enumerate() {
            if q.kind() != kind {
                return Err(Error::InvalidQuery {
                    query: i,
                    reason: format!("expected a {kind:?} query"),
                });
            }
            q.validate(n, i)?;
            if !allow_duplicates && !seen.insert(q.clone()) {
                return Err(Error::DuplicateQuery { query: i });
            }
        }
        Ok(QuerySet {
            n,
            kind,
            queries,
            allow_duplicates,
        })
    }

    pub fn triplets(n: usize, triples: &[(usize, usize, usize)]) -> Result<Self> {
        let queries = triples
            .iter()
            .map(|&(x, a, b)| Query::triplet(x, a, b))
            .collect();
        Self::new(n, QueryKind::Triplet, queries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> QueryKind {
        self.kind
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn allows_duplicates(&self) -> bool {
        self.allow_duplicates
    }

    /// Check a label vector against this set. Equality labels are only
    /// accepted when `allow_equal` is set (class partitions).
    pub fn check_labels(&self, labels: &[Label], allow_equal: bool) -> Result<()> {
        if labels.len() != self.queries.len() {
            return Err(Error::LabelCount {
                labels: labels.len(),
                queries: self.queries.len(),
            });
        }
        let candidates = self.kind.candidate_count();
        for (i, label) in labels.iter().enumerate() {
            match *label {
                Label::Positive(c) if c >= candidates => {
                    return Err(Error::InvalidLabel {
                        query: i,
                        reason: format!("candidate {c} out of range 0..{candidates}"),
                    })
                }
                Label::Equal if self.kind != QueryKind::Triplet => {
                    return Err(Error::InvalidLabel {
                        query: i,
                        reason: "equality labels apply to triplets only".into(),
                    })
                }
                Label::Equal if !allow_equal => {
                    return Err(Error::InvalidLabel {
                        query: i,
                        reason: "equality labels require the class-partition hypothesis class"
                            .into(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// All comparisons implied by a (validated) label vector, in query order.
    pub fn comparisons(&self, labels: &[Label]) -> Vec<Comparison> {
        self.queries
            .iter()
            .zip(labels)
            .flat_map(|(q, &l)| q.comparisons(l))
            .collect()
    }

    pub fn push(&mut self, query: Query) -> Result<()> {
        let mut queries = self.queries.clone();
        queries.push(query);
        *self = Self::with_duplicates(self.n, self.kind, queries, self.allow_duplicates)?;
        Ok(())
    }

    /// Replace every k-negative tuple by the triplets its label implies:
    /// the positive beats each negative.
    pub fn lower_to_triplets(&self, labels: &[Label]) -> Result<(QuerySet, LabelVector)> {
        if !matches!(self.kind, QueryKind::KNegative(_)) {
            return Ok((self.clone(), labels.to_vec()));
        }
        self.check_labels(labels, false)?;
        let mut queries = Vec::new();
        for (q, &label) in self.queries.iter().zip(labels) {
            let (anchor, candidates) = match q {
                Query::KNegative { anchor, candidates } => (*anchor, candidates),
                _ => unreachable!("kind checked above"),
            };
            let Label::Positive(pos) = label else {
                unreachable!("equality rejected by check_labels")
            };
            for (j, &neg) in candidates.iter().enumerate() {
                if j != pos {
                    queries.push(Query::triplet(anchor, candidates[pos], neg));
                }
            }
        }
        let lowered = QuerySet::with_duplicates(self.n, QueryKind::Triplet, queries, true)?;
        let labels = vec![Label::FIRST; lowered.len()];
        Ok((lowered, labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_round_trip() {
        let n = 7;
        for i in 0..Pair::count(n) {
            assert_eq!(Pair::from_index(i, n).index(n), i);
        }
        assert_eq!(Pair::new(0, 1).index(n), 0);
        assert_eq!(Pair::new(5, 6).index(n), Pair::count(n) - 1);
    }

    #[test]
    fn triplet_validation() {
        assert!(QuerySet::triplets(3, &[(0, 1, 2)]).is_ok());
        assert!(matches!(
            QuerySet::triplets(3, &[(0, 0, 2)]),
            Err(Error::InvalidQuery { .. })
        ));
        assert!(matches!(
            QuerySet::triplets(3, &[(0, 1, 3)]),
            Err(Error::Index { index: 3, n: 3 })
        ));
        assert!(matches!(
            QuerySet::triplets(3, &[(0, 1, 2), (0, 1, 2)]),
            Err(Error::DuplicateQuery { query: 1 })
        ));
        let qs = QuerySet::with_duplicates(
            3,
            QueryKind::Triplet,
            vec![Query::triplet(0, 1, 2), Query::triplet(0, 1, 2)],
            true,
        );
        assert!(qs.is_ok());
    }

    #[test]
    fn quadruplet_pairs_must_differ() {
        let q = Query::from_tuple(QueryKind::Quadruplet, &[1, 0, 0, 1]).unwrap();
        assert!(QuerySet::new(2, QueryKind::Quadruplet, vec![q]).is_err());
        assert!(Query::from_tuple(QueryKind::Quadruplet, &[1, 1, 0, 2]).is_err());
    }

    #[test]
    fn knegative_candidates_distinct() {
        let kind = QueryKind::KNegative(2);
        let q = Query::from_tuple(kind, &[0, 1, 2, 1]).unwrap();
        assert!(QuerySet::new(4, kind, vec![q]).is_err());
        let q = Query::from_tuple(kind, &[0, 1, 2, 0]).unwrap();
        assert!(QuerySet::new(4, kind, vec![q]).is_err());
        let q = Query::from_tuple(kind, &[0, 1, 2, 3]).unwrap();
        assert!(QuerySet::new(4, kind, vec![q]).is_ok());
    }

    #[test]
    fn equality_labels_gated() {
        let qs = QuerySet::triplets(3, &[(0, 1, 2)]).unwrap();
        assert!(qs.check_labels(&[Label::Equal], false).is_err());
        assert!(qs.check_labels(&[Label::Equal], true).is_ok());
        assert!(qs.check_labels(&[Label::Positive(2)], true).is_err());
        assert!(matches!(
            qs.check_labels(&[], true),
            Err(Error::LabelCount { .. })
        ));
    }

    #[test]
    fn knegative_lowering() {
        let kind = QueryKind::KNegative(2);
        let qs = QuerySet::new(
            4,
            kind,
            vec![Query::from_tuple(kind, &[0, 1, 2, 3]).unwrap()],
        )
        .unwrap();
        let (lowered, labels) = qs.lower_to_triplets(&[Label::Positive(0)]).unwrap();
        assert_eq!(
            lowered.queries(),
            &[Query::triplet(0, 1, 2), Query::triplet(0, 1, 3)]
        );
        assert_eq!(labels, vec![Label::FIRST, Label::FIRST]);
    }

    #[test]
    fn comparisons_of_labels() {
        let q = Query::triplet(0, 1, 2);
        assert_eq!(
            q.comparisons(Label::SECOND),
            vec![Comparison::Less {
                closer: Pair::new(0, 2),
                farther: Pair::new(0, 1)
            }]
        );
    }
}

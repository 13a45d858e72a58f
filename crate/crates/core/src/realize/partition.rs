//! Class-partition distances (0 inside a class, 1 across): union-find over
//! "same class" requirements, checked against "different class" ones.

use crate::error::{Error, Result};
use crate::model::{DistanceModel, Partition};
use crate::query::{Comparison, Label, Pair, QuerySet};
use crate::verdict::{Certificate, FeasibilityVerdict};

pub const DEFAULT_BRANCH_CAP: u64 = 1 << 16;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut at = x;
        while self.parent[at] != root {
            let next = self.parent[at];
            self.parent[at] = root;
            at = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Default)]
struct Requirements {
    same: Vec<Pair>,
    different: Vec<Pair>,
    // each equality label: both pairs same, or both different
    either: Vec<(Pair, Pair)>,
}

impl Requirements {
    fn from_comparisons(comparisons: &[Comparison]) -> Self {
        let mut req = Requirements::default();
        for c in comparisons {
            match *c {
                // distance 0 < distance 1: closer pair same, farther pair different
                Comparison::Less { closer, farther } => {
                    req.same.push(closer);
                    req.different.push(farther);
                }
                Comparison::Equal { left, right } => req.either.push((left, right)),
            }
        }
        req
    }

    fn branch(&self, bits: u64) -> (Vec<Pair>, Vec<Pair>) {
        let mut same = self.same.clone();
        let mut different = self.different.clone();
        for (j, &(a, b)) in self.either.iter().enumerate() {
            let target = if bits >> j & 1 == 0 {
                &mut same
            } else {
                &mut different
            };
            target.push(a);
            target.push(b);
        }
        (same, different)
    }
}

/// First "different" pair whose endpoints the "same" pairs join, if any.
fn conflict(n: usize, same: &[Pair], different: &[Pair]) -> std::result::Result<UnionFind, Pair> {
    let mut uf = UnionFind::new(n);
    for p in same {
        uf.union(p.lo(), p.hi());
    }
    for p in different {
        if uf.find(p.lo()) == uf.find(p.hi()) {
            return Err(*p);
        }
    }
    Ok(uf)
}

/// Points along a path of "same" pairs from `from` to `to` (breadth first).
fn same_chain(n: usize, same: &[Pair], from: usize, to: usize) -> Vec<usize> {
    let mut adjacency = vec![Vec::new(); n];
    for p in same {
        adjacency[p.lo()].push(p.hi());
        adjacency[p.hi()].push(p.lo());
    }
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([from]);
    prev[from] = from;
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for &y in &adjacency[x] {
            if prev[y] == usize::MAX {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut chain = vec![to];
    let mut at = to;
    while at != from {
        at = prev[at];
        chain.push(at);
    }
    chain.reverse();
    chain
}

/// Decide realizability by a partition into classes.
///
/// Equality labels branch: branch `b` puts the `j`-th equality label (in
/// query order) on "both same" when bit `j` of `b` is 0 and on "both
/// different" when it is 1. Branches are tried in increasing `b`.
pub fn realize_class_partition(
    qs: &QuerySet,
    labels: &[Label],
    branch_cap: u64,
) -> Result<FeasibilityVerdict> {
    qs.check_labels(labels, true)?;
    let n = qs.n();
    let req = Requirements::from_comparisons(&qs.comparisons(labels));
    let equalities = req.either.len() as u32;
    let needed: u128 = 1u128.checked_shl(equalities).unwrap_or(u128::MAX);
    if needed > branch_cap as u128 {
        return Err(Error::BranchCapExceeded {
            needed,
            cap: branch_cap,
        });
    }
    let branches = needed as u64;
    let mut first_conflict = None;
    for bits in 0..branches {
        let (same, different) = req.branch(bits);
        match conflict(n, &same, &different) {
            Ok(mut uf) => {
                let mut ids = vec![usize::MAX; n];
                let mut class_of = Vec::with_capacity(n);
                let mut next = 0;
                for x in 0..n {
                    let root = uf.find(x);
                    if ids[root] == usize::MAX {
                        ids[root] = next;
                        next += 1;
                    }
                    class_of.push(ids[root]);
                }
                let partition = Partition::new(class_of, next.max(2))?;
                let model = DistanceModel::Partition(partition);
                let margin = model.margin(&qs.comparisons(labels))?;
                return Ok(FeasibilityVerdict::sat(model, margin));
            }
            Err(pair) => {
                if first_conflict.is_none() {
                    first_conflict = Some((same_chain(n, &same, pair.lo(), pair.hi()), pair));
                }
            }
        }
    }
    let (chain, pair) = first_conflict.expect("at least one branch was tried");
    Ok(FeasibilityVerdict::unsat(Certificate::UnionFindConflict {
        chain,
        different: (pair.lo(), pair.hi()),
        branches_refuted: branches,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{Query, QueryKind};

    fn partition_of(v: &FeasibilityVerdict) -> Vec<usize> {
        match v.witness() {
            Some(DistanceModel::Partition(p)) => p.class_of().to_vec(),
            other => panic!("expected a partition, got {other:?}"),
        }
    }

    #[test]
    fn single_query_two_classes() {
        let qs = QuerySet::triplets(3, &[(0, 1, 2)]).unwrap();
        let v = realize_class_partition(&qs, &[Label::FIRST], DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(partition_of(&v), vec![0, 0, 1]);
    }

    #[test]
    fn transitivity_conflict() {
        // a=0, b=1, c=2: (a, b+, c-), (b, c+, a-)
        let qs = QuerySet::triplets(3, &[(0, 1, 2), (1, 2, 0)]).unwrap();
        let v = realize_class_partition(&qs, &[Label::FIRST; 2], DEFAULT_BRANCH_CAP).unwrap();
        assert!(v.is_unsat());
        match v.certificate() {
            Some(Certificate::UnionFindConflict {
                chain, different, ..
            }) => {
                assert_eq!(chain.first(), Some(&different.0));
                assert_eq!(chain.last(), Some(&different.1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_label_branching() {
        // x=0, y=1, z=2, w=3: (x, y+, z+), (x, y+, w-)
        let qs = QuerySet::triplets(4, &[(0, 1, 2), (0, 1, 3)]).unwrap();
        let labels = [Label::Equal, Label::FIRST];
        let v = realize_class_partition(&qs, &labels, DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(partition_of(&v), vec![0, 0, 0, 1]);
        assert!(v.witness().unwrap().satisfies(&qs, &labels));
    }

    #[test]
    fn single_class_padded() {
        let qs = QuerySet::triplets(3, &[(0, 1, 2)]).unwrap();
        let v = realize_class_partition(&qs, &[Label::Equal], DEFAULT_BRANCH_CAP).unwrap();
        match v.witness() {
            Some(DistanceModel::Partition(p)) => {
                assert_eq!(p.class_of(), &[0, 0, 0]);
                assert_eq!(p.classes(), 2);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn branch_cap_enforced() {
        let qs = QuerySet::triplets(4, &[(0, 1, 2), (0, 1, 3), (0, 2, 3)]).unwrap();
        let labels = [Label::Equal; 3];
        assert!(matches!(
            realize_class_partition(&qs, &labels, 4),
            Err(Error::BranchCapExceeded { needed: 8, cap: 4 })
        ));
        assert!(realize_class_partition(&qs, &labels, 8).is_ok());
    }

    #[test]
    fn quadruplets_accepted() {
        let q = Query::from_tuple(QueryKind::Quadruplet, &[0, 1, 2, 3]).unwrap();
        let qs = QuerySet::new(4, QueryKind::Quadruplet, vec![q]).unwrap();
        let v = realize_class_partition(&qs, &[Label::FIRST], DEFAULT_BRANCH_CAP).unwrap();
        assert!(v.witness().unwrap().satisfies(&qs, &[Label::FIRST]));
    }
}

//! Arbitrary and metric distances: a labeling is realizable iff the digraph
//! of "pair p must be closer than pair q" constraints is acyclic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::model::{DistanceMatrix, DistanceModel, Rational};
use crate::query::{Comparison, Label, Pair, QuerySet};
use crate::verdict::{Certificate, FeasibilityVerdict};

/// Directed graph over the pairs of `0..n`; an edge `p -> q` records
/// `rho(p) < rho(q)`. Nodes are pair indices in lexicographic order.
#[derive(Debug, Clone)]
pub struct PairDigraph {
    n: usize,
    out: Vec<Vec<usize>>,
    occurs: Vec<bool>,
}

impl PairDigraph {
    pub fn new(n: usize, comparisons: &[Comparison]) -> Self {
        let nodes = Pair::count(n);
        let mut out = vec![Vec::new(); nodes];
        let mut occurs = vec![false; nodes];
        for c in comparisons {
            if let Comparison::Less { closer, farther } = *c {
                let (a, b) = (closer.index(n), farther.index(n));
                occurs[a] = true;
                occurs[b] = true;
                if !out[a].contains(&b) {
                    out[a].push(b);
                }
            }
        }
        PairDigraph { n, out, occurs }
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    /// Pairs that appear in at least one constraint.
    pub fn occurring(&self) -> Vec<Pair> {
        (0..self.node_count())
            .filter(|&i| self.occurs[i])
            .map(|i| Pair::from_index(i, self.n))
            .collect()
    }

    /// A directed cycle, rotated to start at its smallest pair, if one exists.
    pub fn cycle(&self) -> Option<Vec<Pair>> {
        let nodes = self.node_count();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; nodes];
        let mut parent = vec![usize::MAX; nodes];
        for root in 0..nodes {
            if state[root] != 0 || self.out[root].is_empty() {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&w) = self.out[v].get(*next) {
                    *next += 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            parent[w] = v;
                            stack.push((w, 0));
                        }
                        1 => {
                            let mut cycle = vec![v];
                            let mut at = v;
                            while at != w {
                                at = parent[at];
                                cycle.push(at);
                            }
                            cycle.reverse();
                            let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
                            cycle.rotate_left(start);
                            return Some(
                                cycle.into_iter().map(|i| Pair::from_index(i, self.n)).collect(),
                            );
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Rank (from 1) of every pair in the topological order that always
    /// takes the smallest available pair index; `None` if cyclic.
    pub fn topological_ranks(&self) -> Option<Vec<usize>> {
        let nodes = self.node_count();
        let mut indegree = vec![0usize; nodes];
        for targets in &self.out {
            for &t in targets {
                indegree[t] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..nodes).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut rank = vec![0usize; nodes];
        let mut next = 1;
        while let Some(Reverse(v)) = ready.pop() {
            rank[v] = next;
            next += 1;
            for &w in &self.out[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        (next == nodes + 1).then_some(rank)
    }
}

/// Decide realizability by an arbitrary symmetric distance (or a metric).
///
/// The witness gives pair `p` the value `N + rank(p)`, `N` the number of
/// pairs, so every value lies in `[N + 1, 2N]` and any two of them sum to
/// more than a third: the witness is a metric either way.
pub fn realize_arbitrary(
    qs: &QuerySet,
    labels: &[Label],
    metric: bool,
) -> Result<FeasibilityVerdict> {
    qs.check_labels(labels, false)?;
    let graph = PairDigraph::new(qs.n(), &qs.comparisons(labels));
    if let Some(cycle) = graph.cycle() {
        return Ok(FeasibilityVerdict::unsat(Certificate::Cycle(cycle)));
    }
    let ranks = graph
        .topological_ranks()
        .expect("acyclic graph has a topological order");
    let n = qs.n();
    let base = Pair::count(n);
    let matrix = DistanceMatrix::from_pairs(n, |pair| {
        Rational::from_integer((base + ranks[pair.index(n)]).into())
    });
    debug_assert!(!metric || matrix.is_metric());
    let model = DistanceModel::Matrix(matrix);
    let margin = model.margin(&qs.comparisons(labels))?;
    Ok(FeasibilityVerdict::sat(model, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Status;

    // c=0, r=1, p=2, t=3
    #[test]
    fn cyclic_labels_refuted() {
        let qs = QuerySet::triplets(4, &[(0, 1, 2), (0, 2, 3), (0, 3, 1)]).unwrap();
        let v = realize_arbitrary(&qs, &[Label::FIRST; 3], false).unwrap();
        assert_eq!(v.status(), Status::Unsat);
        assert_eq!(
            v.certificate(),
            Some(&Certificate::Cycle(vec![
                Pair::new(0, 1),
                Pair::new(0, 2),
                Pair::new(0, 3)
            ]))
        );
    }

    #[test]
    fn single_label_witness_ranks() {
        let qs = QuerySet::triplets(3, &[(0, 1, 2)]).unwrap();
        let v = realize_arbitrary(&qs, &[Label::FIRST], true).unwrap();
        let Some(DistanceModel::Matrix(m)) = v.witness() else {
            panic!("expected a matrix witness")
        };
        let int = |x: i64| Rational::from_integer(x.into());
        // N = 3 pairs
        assert_eq!(m.get(0, 1), &int(4));
        assert_eq!(m.get(0, 2), &int(5));
        assert_eq!(m.get(1, 2), &int(6));
        assert!(m.is_metric());
        assert!(v.witness().unwrap().satisfies(&qs, &[Label::FIRST]));
    }

    #[test]
    fn lower_bound_family_n5_all_labelings() {
        let mut triples = Vec::new();
        for i in 0..5 {
            for j in i + 1..4 {
                triples.push((i, j, j + 1));
            }
        }
        assert_eq!(triples.len(), 6);
        let qs = QuerySet::triplets(5, &triples).unwrap();
        for bits in 0..64u32 {
            let labels: Vec<Label> = (0..6)
                .map(|q| Label::Positive((bits >> (5 - q) & 1) as usize))
                .collect();
            let v = realize_arbitrary(&qs, &labels, true).unwrap();
            assert!(v.is_sat());
            assert!(v.witness().unwrap().satisfies(&qs, &labels));
        }
    }
}

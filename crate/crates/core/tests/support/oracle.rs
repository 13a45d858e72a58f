//! Brute-force reference checkers, independent of the library's algorithms.

#![allow(dead_code)]

use contrastive_vc::{Label, Pair, Query, QueryKind, QuerySet};
use rand::Rng;

/// `(closer, farther)` pair constraints for a labeled triplet or quadruplet.
fn strict_constraints(qs: &QuerySet, labels: &[Label]) -> Vec<(Pair, Pair)> {
    qs.queries()
        .iter()
        .zip(labels)
        .flat_map(|(q, l)| {
            let pairs = q.candidate_pairs();
            let Label::Positive(i) = *l else {
                panic!("strict labels only");
            };
            (0..pairs.len())
                .filter(move |&j| j != i)
                .map(move |j| (pairs[i], pairs[j]))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Whether some ranking of the occurring pairs (distinct values) satisfies
/// every constraint, by Heap's algorithm over all rankings.
pub fn brute_force_arbitrary(qs: &QuerySet, labels: &[Label]) -> bool {
    let constraints = strict_constraints(qs, labels);
    if constraints.iter().any(|(a, b)| a == b) {
        return false;
    }
    let mut pairs: Vec<Pair> = constraints.iter().flat_map(|&(a, b)| [a, b]).collect();
    pairs.sort_by_key(|p| (p.lo(), p.hi()));
    pairs.dedup();
    let idx = |p: Pair| pairs.iter().position(|&q| q == p).unwrap();
    let cons: Vec<(usize, usize)> = constraints.iter().map(|&(a, b)| (idx(a), idx(b))).collect();
    let k = pairs.len();
    // rank[i] is the position of pair i
    let mut perm: Vec<usize> = (0..k).collect();
    let ok = |perm: &[usize]| cons.iter().all(|&(a, b)| perm[a] < perm[b]);
    if ok(&perm) {
        return true;
    }
    let mut c = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if ok(&perm) {
                return true;
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    false
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=max + 1 {
            prefix.push(v);
            go(prefix, n, max.max(v), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    go(&mut vec![0], n, 0, &mut out);
    out
}

/// Whether some partition of the points satisfies every triplet label under
/// the 0/1 class distance.
pub fn brute_force_partition(qs: &QuerySet, labels: &[Label]) -> bool {
    restricted_growth_strings(qs.n()).iter().any(|class| {
        let d = |p: Pair| (class[p.lo()] != class[p.hi()]) as u8;
        qs.queries().iter().zip(labels).all(|(q, l)| {
            let pairs = q.candidate_pairs();
            match *l {
                Label::Equal => d(pairs[0]) == d(pairs[1]),
                Label::Positive(i) => {
                    (0..pairs.len()).all(|j| j == i || d(pairs[i]) < d(pairs[j]))
                }
            }
        })
    })
}

pub fn random_triplets<R: Rng>(rng: &mut R, n: usize, m: usize) -> QuerySet {
    let mut queries: Vec<Query> = Vec::new();
    while queries.len() < m {
        let x = rng.random_range(0..n);
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if x == a || x == b || a == b {
            continue;
        }
        let q = Query::triplet(x, a, b);
        if !queries.contains(&q) {
            queries.push(q);
        }
    }
    QuerySet::with_duplicates(n, QueryKind::Triplet, queries, true).unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, m: usize, candidates: usize, equal_rate: f64) -> Vec<Label> {
    (0..m)
        .map(|_| {
            if rng.random::<f64>() < equal_rate {
                Label::Equal
            } else {
                Label::Positive(rng.random_range(0..candidates))
            }
        })
        .collect()
}

//! Exact l_p realizability by ordering enumeration.
//!
//! Once the left-to-right order of the points is fixed in every coordinate,
//! `|u_c - v_c|` is a sum of consecutive gaps, so each labeled comparison is
//! a homogeneous linear inequality in the gaps (for one coordinate any `p`
//! works, since `|u - v|^p` orders like `|u - v|`; with several coordinates
//! only `p = 1` stays linear).

use itertools::Itertools;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::LinearSystem;
use crate::model::{DistanceModel, Embedding, Geometry, Rational};
use crate::query::{Comparison, Label, Pair, QuerySet};
use crate::verdict::{Certificate, FeasibilityVerdict};

use super::arbitrary::PairDigraph;

pub const DEFAULT_LINE_CAP: usize = 8;
/// Largest `n * d` accepted by the multi-coordinate l1 enumeration.
pub const DEFAULT_MULTI_CAP: usize = 12;

/// Point orders up to reversal (a reversed line has the same distances).
fn orderings(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .permutations(n)
        .filter(|p| n < 2 || p[0] < p[n - 1])
        .collect()
}

/// Gap variables: coordinate `c` owns `c * (n - 1) .. (c + 1) * (n - 1)`.
fn gap_row(n: usize, orders: &[&Vec<usize>], rank: &[Vec<usize>], pair: Pair) -> Vec<usize> {
    let mut vars = Vec::new();
    for (c, _) in orders.iter().enumerate() {
        let (a, b) = (rank[c][pair.lo()], rank[c][pair.hi()]);
        for k in a.min(b)..a.max(b) {
            vars.push(c * (n - 1) + k);
        }
    }
    vars
}

fn ordering_system(n: usize, orders: &[&Vec<usize>], comparisons: &[Comparison]) -> LinearSystem {
    let rank: Vec<Vec<usize>> = orders
        .iter()
        .map(|o| {
            let mut r = vec![0; n];
            for (k, &x) in o.iter().enumerate() {
                r[x] = k;
            }
            r
        })
        .collect();
    let vars = orders.len() * (n - 1);
    let mut sys = LinearSystem::new(vars).nonnegative();
    for c in comparisons {
        if let Comparison::Less { closer, farther } = *c {
            let mut row = vec![Rational::zero(); vars];
            for v in gap_row(n, orders, &rank, farther) {
                row[v] += Rational::one();
            }
            for v in gap_row(n, orders, &rank, closer) {
                row[v] -= Rational::one();
            }
            sys.push_strict(row);
        }
    }
    sys
}

fn positions(n: usize, orders: &[&Vec<usize>], gaps: &[Rational]) -> Vec<Vec<Rational>> {
    let mut coords = vec![vec![Rational::zero(); orders.len()]; n];
    for (c, order) in orders.iter().enumerate() {
        let mut at = Rational::zero();
        for (k, &x) in order.iter().enumerate() {
            if k > 0 {
                at += &gaps[c * (n - 1) + k - 1];
            }
            coords[x][c] = at.clone();
        }
    }
    coords
}

fn search(
    qs: &QuerySet,
    labels: &[Label],
    d: usize,
    geometry: Geometry,
) -> Result<FeasibilityVerdict> {
    let n = qs.n();
    let comparisons = qs.comparisons(labels);
    if let Some(cycle) = PairDigraph::new(n, &comparisons).cycle() {
        return Ok(FeasibilityVerdict::unsat(Certificate::Cycle(cycle)));
    }
    if n < 2 {
        let embedding = Embedding::exact(geometry, vec![vec![Rational::zero(); d]; n])?;
        return Ok(FeasibilityVerdict::sat(DistanceModel::Embedding(embedding), None));
    }
    let single = orderings(n);
    // coordinates are interchangeable, so nondecreasing tuples of orders suffice
    let combos: Vec<Vec<usize>> = (0..single.len())
        .combinations_with_replacement(d)
        .collect();
    let found = combos.par_iter().find_first(|combo| {
        let orders: Vec<&Vec<usize>> = combo.iter().map(|&i| &single[i]).collect();
        ordering_system(n, &orders, &comparisons)
            .is_strictly_feasible()
            .expect("rows built with matching widths")
    });
    let Some(combo) = found else {
        return Ok(FeasibilityVerdict::unsat(Certificate::ExhaustedEnumeration {
            refuted: combos.len() as u64,
        }));
    };
    let orders: Vec<&Vec<usize>> = combo.iter().map(|&i| &single[i]).collect();
    let solution = ordering_system(n, &orders, &comparisons).strict_feasible()?;
    let gaps = solution.witness.expect("feasible system has a witness");
    let embedding = Embedding::exact(geometry, positions(n, &orders, &gaps))?;
    let model = DistanceModel::Embedding(embedding);
    let margin = model.margin(&comparisons)?;
    Ok(FeasibilityVerdict::sat(model, margin))
}

/// Exact realizability on the real line under any `l_p` (`p >= 1`).
pub fn realize_line(
    qs: &QuerySet,
    labels: &[Label],
    p: u32,
    cap: usize,
) -> Result<FeasibilityVerdict> {
    qs.check_labels(labels, false)?;
    if qs.n() > cap {
        return Err(Error::CapExceeded(format!(
            "line enumeration covers n <= {cap}, got n = {}",
            qs.n()
        )));
    }
    search(qs, labels, 1, Geometry::Lp(p))
}

/// Exact realizability in `l_1^d` by enumerating one order per coordinate.
pub fn realize_l1_ordered(
    qs: &QuerySet,
    labels: &[Label],
    d: usize,
    cap: usize,
) -> Result<FeasibilityVerdict> {
    qs.check_labels(labels, false)?;
    if qs.n() * d > cap {
        return Err(Error::CapExceeded(format!(
            "per-coordinate enumeration covers n * d <= {cap}, got {}",
            qs.n() * d
        )));
    }
    search(qs, labels, d, Geometry::Lp(1))
}

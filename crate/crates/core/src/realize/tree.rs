//! Tree-metric realizability: for a fixed topology every leaf-to-leaf
//! distance is a sum of edge weights, so each labeled comparison is a
//! linear inequality in the weights.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::LinearSystem;
use crate::model::{DistanceModel, Rational, WeightedTree};
use crate::query::{Comparison, Label, QuerySet};
use crate::verdict::{Certificate, FeasibilityVerdict};

use super::arbitrary::PairDigraph;

pub const DEFAULT_TREE_CAP: usize = 6;

/// Unweighted tree shape; vertices `0..n` are the leaves carrying the points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn internal_count(&self, n: usize) -> usize {
        self.vertices - n
    }
}

/// All trees whose leaves are exactly `0..n` and whose internal vertices
/// have degree at least 3, fewest internal vertices first.
///
/// Built by stepwise leaf addition: leaf `k` either hangs off an existing
/// internal vertex or subdivides an existing edge. Removing leaf `k` (and
/// suppressing a resulting degree-2 vertex) inverts the step, so every tree
/// appears exactly once.
pub fn topologies(n: usize) -> Vec<Topology> {
    match n {
        0 => return vec![],
        1 => {
            return vec![Topology {
                vertices: 1,
                edges: vec![],
            }]
        }
        2 => {
            return vec![Topology {
                vertices: 2,
                edges: vec![(0, 1)],
            }]
        }
        _ => {}
    }
    // star on leaves 0, 1, 2; internal vertices are numbered from n upward
    let mut trees = vec![Topology {
        vertices: n + 1,
        edges: vec![(0, n), (1, n), (2, n)],
    }];
    for leaf in 3..n {
        let mut next = Vec::new();
        for t in &trees {
            for internal in n..t.vertices {
                let mut edges = t.edges.clone();
                edges.push((leaf, internal));
                next.push(Topology {
                    vertices: t.vertices,
                    edges,
                });
            }
            for e in 0..t.edges.len() {
                let (u, v) = t.edges[e];
                let w = t.vertices;
                let mut edges = t.edges.clone();
                edges[e] = (u, w);
                edges.push((w, v));
                edges.push((leaf, w));
                next.push(Topology {
                    vertices: t.vertices + 1,
                    edges,
                });
            }
        }
        trees = next;
    }
    trees.sort_by_key(|t| t.vertices);
    trees
}

fn weight_system(
    n: usize,
    topology: &Topology,
    comparisons: &[Comparison],
) -> Result<(LinearSystem, WeightedTree)> {
    let unit = WeightedTree::new(
        topology.vertices,
        topology
            .edges
            .iter()
            .map(|&(u, v)| (u, v, Rational::one()))
            .collect(),
        (0..n).collect(),
    )?;
    let vars = topology.edges.len();
    let mut sys = LinearSystem::new(vars).nonnegative();
    for c in comparisons {
        if let Comparison::Less { closer, farther } = *c {
            let mut row = vec![Rational::zero(); vars];
            for e in unit.path_edges(farther.lo(), farther.hi()) {
                row[e] += Rational::one();
            }
            for e in unit.path_edges(closer.lo(), closer.hi()) {
                row[e] -= Rational::one();
            }
            sys.push_strict(row);
        }
    }
    Ok((sys, unit))
}

/// Exact realizability by a tree metric with the points on distinct leaves.
pub fn realize_tree(qs: &QuerySet, labels: &[Label], cap: usize) -> Result<FeasibilityVerdict> {
    qs.check_labels(labels, false)?;
    let n = qs.n();
    if n > cap {
        return Err(Error::CapExceeded(format!(
            "topology enumeration covers n <= {cap}, got n = {n}"
        )));
    }
    let comparisons = qs.comparisons(labels);
    if let Some(cycle) = PairDigraph::new(n, &comparisons).cycle() {
        return Ok(FeasibilityVerdict::unsat(Certificate::Cycle(cycle)));
    }
    if n == 0 {
        return Err(Error::InvalidModel("a tree needs at least one point".into()));
    }
    let shapes = topologies(n);
    let found = shapes.par_iter().find_first(|t| {
        weight_system(n, t, &comparisons)
            .and_then(|(sys, _)| sys.is_strictly_feasible())
            .expect("enumerated topologies are valid trees")
    });
    let Some(topology) = found else {
        return Ok(FeasibilityVerdict::unsat(Certificate::ExhaustedEnumeration {
            refuted: shapes.len() as u64,
        }));
    };
    let (sys, unit) = weight_system(n, topology, &comparisons)?;
    let weights = sys
        .strict_feasible()?
        .witness
        .expect("feasible system has a witness");
    let tree = WeightedTree::new(
        unit.vertex_count(),
        unit.edges()
            .iter()
            .zip(weights)
            .map(|(&(u, v, _), w)| (u, v, w))
            .collect(),
        (0..n).collect(),
    )?;
    let model = DistanceModel::WeightedTree(tree);
    let margin = model.margin(&comparisons)?;
    Ok(FeasibilityVerdict::sat(model, margin))
}

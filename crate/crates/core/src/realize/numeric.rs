//! Numeric embedding search for classes without an exact checker.
//!
//! Gradient descent on the hinge objective
//! `sum max(0, gamma + s * D(near) - D(far))`, `D` the p-th power distance,
//! from several random starts. A
//! found embedding is accepted only after re-evaluating every label with the
//! float comparison rules and checking the margin; failure is UNKNOWN, never
//! UNSAT.

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{lp_distance, DistanceModel, Embedding, Geometry};
use crate::query::{Comparison, Label, Pair, QuerySet};
use crate::seed::child_rng;
use crate::verdict::FeasibilityVerdict;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericConfig {
    pub restarts: usize,
    pub iterations: usize,
    /// Hinge margin.
    pub gamma: f64,
    /// Smallest accepted slack after rescaling to unit diameter.
    pub tau: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            restarts: 20,
            iterations: 2000,
            gamma: 1e-3,
            tau: 1e-6,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

/// Embedding family searched numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericTarget {
    Lp { p: u32, d: usize },
    /// Unit vectors compared by cosine; searched as l2 on the sphere.
    Cosine { d: usize },
    /// l2 with every far distance above `(1 + alpha)` times the near one.
    Separated { d: usize, alpha: f64 },
}

impl NumericTarget {
    fn dim(self) -> usize {
        match self {
            NumericTarget::Lp { d, .. }
            | NumericTarget::Cosine { d }
            | NumericTarget::Separated { d, .. } => d,
        }
    }

    fn power(self) -> u32 {
        match self {
            NumericTarget::Lp { p, .. } => p,
            _ => 2,
        }
    }

    /// Factor on the near distance (not its power).
    fn ratio(self) -> f64 {
        match self {
            NumericTarget::Separated { alpha, .. } => 1.0 + alpha,
            _ => 1.0,
        }
    }

    fn geometry(self) -> Geometry {
        match self {
            NumericTarget::Cosine { .. } => Geometry::Cosine,
            _ => Geometry::Lp(self.power()),
        }
    }
}

struct Problem<'a> {
    d: usize,
    target: NumericTarget,
    pairs: &'a [(Pair, Pair)],
    cfg: &'a NumericConfig,
}

impl Problem<'_> {
    fn powered(&self, x: &[f64], pair: Pair) -> f64 {
        let p = self.target.power() as i32;
        let (u, v) = (pair.lo() * self.d, pair.hi() * self.d);
        (0..self.d).map(|c| (x[u + c] - x[v + c]).abs().powi(p)).sum()
    }

    fn add_gradient(&self, x: &[f64], pair: Pair, scale: f64, grad: &mut [f64]) {
        let p = self.target.power();
        let (u, v) = (pair.lo() * self.d, pair.hi() * self.d);
        for c in 0..self.d {
            let diff = x[u + c] - x[v + c];
            let g = match p {
                1 => diff.signum(),
                _ => p as f64 * diff.abs().powi(p as i32 - 1) * diff.signum(),
            };
            grad[u + c] += scale * g;
            grad[v + c] -= scale * g;
        }
    }

    /// Hinge objective and its gradient.
    fn step(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let s = self.target.ratio().powi(self.target.power() as i32);
        let mut total = 0.0;
        for &(near, far) in self.pairs {
            let slack = self.cfg.gamma + s * self.powered(x, near) - self.powered(x, far);
            if slack > 0.0 {
                total += slack;
                self.add_gradient(x, near, s, grad);
                self.add_gradient(x, far, -1.0, grad);
            }
        }
        total
    }

    fn normalize(&self, x: &mut [f64]) {
        if let NumericTarget::Cosine { .. } = self.target {
            for point in x.chunks_mut(self.d) {
                let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    point.iter_mut().for_each(|v| *v /= norm);
                }
            }
        }
    }

    fn descend(&self, x: &mut Vec<f64>) {
        self.normalize(x);
        let mut grad = vec![0.0; x.len()];
        for it in 0..self.cfg.iterations {
            if self.step(x, &mut grad) == 0.0 {
                return;
            }
            // halve the step every quarter of the budget
            let lr = self.cfg.learning_rate * 0.5f64.powi((4 * it / self.cfg.iterations.max(1)) as i32);
            for (xi, gi) in x.iter_mut().zip(&grad) {
                *xi -= lr * gi;
            }
            self.normalize(x);
        }
    }
}

/// Rescale an l_p embedding to unit diameter; cosine embeddings stay on the sphere.
fn rescaled(points: Vec<Vec<f64>>, target: NumericTarget) -> Vec<Vec<f64>> {
    if let NumericTarget::Cosine { .. } = target {
        return points;
    }
    let p = target.power();
    let mut diameter: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max(lp_distance(&points[i], &points[j], p));
        }
    }
    if diameter == 0.0 {
        return points;
    }
    points
        .into_iter()
        .map(|r| r.into_iter().map(|v| v / diameter).collect())
        .collect()
}

/// Smallest `dist(far) - ratio * dist(near)` of a float embedding.
fn separation_margin(model: &DistanceModel, pairs: &[(Pair, Pair)], ratio: f64) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for &(near, far) in pairs {
        let slack = model.distance_f64(far)? - ratio * model.distance_f64(near)?;
        margin = margin.min(slack);
    }
    Ok(margin)
}

/// Search for an embedding realizing the labels; SAT or UNKNOWN.
pub fn realize_embedding_numeric(
    qs: &QuerySet,
    labels: &[Label],
    target: NumericTarget,
    cfg: &NumericConfig,
) -> Result<FeasibilityVerdict> {
    qs.check_labels(labels, false)?;
    let n = qs.n();
    let d = target.dim();
    let pairs: Vec<(Pair, Pair)> = qs
        .comparisons(labels)
        .into_iter()
        .filter_map(|c| match c {
            Comparison::Less { closer, farther } => Some((closer, farther)),
            Comparison::Equal { .. } => None,
        })
        .collect();
    let problem = Problem {
        d,
        target,
        pairs: &pairs,
        cfg,
    };
    let found = (0..cfg.restarts).into_par_iter().find_map_first(|r| {
        let mut rng = child_rng(cfg.seed, r as u64);
        let mut x: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
        problem.descend(&mut x);
        let points = rescaled(x.chunks(d.max(1)).map(<[f64]>::to_vec).collect(), target);
        let embedding = Embedding::float(target.geometry(), points).ok()?;
        let model = DistanceModel::Embedding(embedding);
        if !model.satisfies(qs, labels) {
            return None;
        }
        let margin = separation_margin(&model, &pairs, target.ratio()).ok()?;
        (margin >= cfg.tau).then_some((model, margin))
    });
    Ok(match found {
        Some((model, margin)) => {
            FeasibilityVerdict::sat(model, margin.is_finite().then_some(margin))
        }
        None => FeasibilityVerdict::unknown(),
    })
}

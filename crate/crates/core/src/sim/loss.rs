//! Training losses with analytic gradients, and a finite-difference check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `sum_j max(0, D(x, y) - D(x, z_j) + 1)` with `D = ||.||_p^p`.
    MarginTriplet,
    /// `-log softmax` of the positive's inner product with the anchor.
    SoftmaxContrastive,
}

/// An anchor, its candidates, and which candidate is the positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTuple {
    pub anchor: usize,
    pub candidates: Vec<usize>,
    pub positive: usize,
}

/// Flat row-major embedding of `n` points in `dim` coordinates.
pub(crate) struct Params<'a> {
    pub theta: &'a [f64],
    pub dim: usize,
}

impl Params<'_> {
    fn point(&self, i: usize) -> &[f64] {
        &self.theta[i * self.dim..(i + 1) * self.dim]
    }

    fn powered(&self, a: usize, b: usize, p: u32) -> f64 {
        self.point(a)
            .iter()
            .zip(self.point(b))
            .map(|(u, v)| (u - v).abs().powi(p as i32))
            .sum()
    }

    fn inner(&self, a: usize, b: usize) -> f64 {
        self.point(a).iter().zip(self.point(b)).map(|(u, v)| u * v).sum()
    }
}

fn add_powered_grad(params: &Params, a: usize, b: usize, p: u32, scale: f64, grad: &mut [f64]) {
    let dim = params.dim;
    for c in 0..dim {
        let diff = params.theta[a * dim + c] - params.theta[b * dim + c];
        let g = match p {
            1 => diff.signum(),
            _ => p as f64 * diff.abs().powi(p as i32 - 1) * diff.signum(),
        };
        grad[a * dim + c] += scale * g;
        grad[b * dim + c] -= scale * g;
    }
}

/// Loss of one tuple; adds `scale * gradient` into `grad` when given.
pub(crate) fn tuple_loss(
    kind: LossKind,
    p: u32,
    params: &Params,
    t: &LabeledTuple,
    scale: f64,
    grad: Option<&mut [f64]>,
) -> f64 {
    let pos = t.candidates[t.positive];
    match kind {
        LossKind::MarginTriplet => {
            let near = params.powered(t.anchor, pos, p);
            let mut total = 0.0;
            let mut grad = grad;
            for (j, &neg) in t.candidates.iter().enumerate() {
                if j == t.positive {
                    continue;
                }
                let arg = near - params.powered(t.anchor, neg, p) + 1.0;
                if arg > 0.0 {
                    total += arg;
                    if let Some(g) = grad.as_deref_mut() {
                        add_powered_grad(params, t.anchor, pos, p, scale, g);
                        add_powered_grad(params, t.anchor, neg, p, -scale, g);
                    }
                }
            }
            total
        }
        LossKind::SoftmaxContrastive => {
            let scores: Vec<f64> = t.candidates.iter().map(|&c| params.inner(t.anchor, c)).collect();
            let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = scores.iter().map(|s| (s - top).exp()).sum();
            let loss = -(scores[t.positive] - top) + z.ln();
            if let Some(g) = grad {
                let dim = params.dim;
                for (j, &c) in t.candidates.iter().enumerate() {
                    let q = (scores[j] - top).exp() / z;
                    let w = scale * (q - if j == t.positive { 1.0 } else { 0.0 });
                    for k in 0..dim {
                        g[t.anchor * dim + k] += w * params.theta[c * dim + k];
                        g[c * dim + k] += w * params.theta[t.anchor * dim + k];
                    }
                }
            }
            loss
        }
    }
}

/// Mean loss over `tuples` and its gradient.
pub(crate) fn mean_loss(
    kind: LossKind,
    p: u32,
    params: &Params,
    tuples: &[LabeledTuple],
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    if tuples.is_empty() {
        return 0.0;
    }
    let scale = 1.0 / tuples.len() as f64;
    tuples
        .iter()
        .map(|t| tuple_loss(kind, p, params, t, scale, Some(grad)))
        .sum::<f64>()
        * scale
}

/// Whether a step of `h` in any coordinate could cross a non-smooth point:
/// a hinge argument changing side, or (for `p = 1`) a coordinate gap
/// crossing zero.
fn near_kink(kind: LossKind, p: u32, theta: &[f64], dim: usize, t: &LabeledTuple, h: f64) -> bool {
    if kind != LossKind::MarginTriplet {
        return false;
    }
    let pos = t.candidates[t.positive];
    if p == 1 {
        for &c in &t.candidates {
            for k in 0..dim {
                if (theta[t.anchor * dim + k] - theta[c * dim + k]).abs() <= 2.0 * h {
                    return true;
                }
            }
        }
    }
    let hinge_args = |th: &[f64]| -> Vec<f64> {
        let params = Params { theta: th, dim };
        let near = params.powered(t.anchor, pos, p);
        t.candidates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != t.positive)
            .map(|(_, &neg)| near - params.powered(t.anchor, neg, p) + 1.0)
            .collect()
    };
    let base = hinge_args(theta);
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        for delta in [h, -h] {
            probe[i] = theta[i] + delta;
            let moved = hinge_args(&probe);
            if base.iter().zip(&moved).any(|(a, b)| (*a > 0.0) != (*b > 0.0) || *b == 0.0) {
                return true;
            }
        }
        probe[i] = theta[i];
    }
    false
}

/// Largest coordinate-wise relative error `|a - b| / max(|a|, |b|, 1)`
/// between the analytic gradient and central differences of step `h`.
pub fn gradient_check(
    kind: LossKind,
    p: u32,
    dim: usize,
    tuple: &LabeledTuple,
    theta: &[f64],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step h must be positive, got {h}")));
    }
    if dim == 0 || theta.len() % dim != 0 {
        return Err(Error::Domain("theta length must be a multiple of dim".into()));
    }
    let n = theta.len() / dim;
    if tuple.anchor >= n
        || tuple.positive >= tuple.candidates.len()
        || tuple.candidates.iter().any(|&c| c >= n)
    {
        return Err(Error::Domain("tuple indexes outside theta".into()));
    }
    if near_kink(kind, p, theta, dim, tuple, h) {
        return Err(Error::KinkDetected);
    }
    let mut analytic = vec![0.0; theta.len()];
    tuple_loss(kind, p, &Params { theta, dim }, tuple, 1.0, Some(&mut analytic));
    let mut probe = theta.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = tuple_loss(kind, p, &Params { theta: &probe, dim }, tuple, 1.0, None);
        probe[i] = theta[i] - h;
        let down = tuple_loss(kind, p, &Params { theta: &probe, dim }, tuple, 1.0, None);
        probe[i] = theta[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

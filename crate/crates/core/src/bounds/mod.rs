//! Closed-form sample-complexity bounds and their empirical validators.

pub mod fixed;
pub mod hemisphere;
pub mod jl;
pub mod warren;

pub use hemisphere::{
    hemisphere_bound, hemisphere_experiment, hemisphere_monte_carlo, sample_vectors, HemisphereReport,
    VectorLayout,
};
pub use jl::{distortion, gaussian_projection, jl_check, jl_dimension, jl_lemma_dimension, Distortion, JlReport};
pub use warren::{
    counting_for, vc_upper_crossover, vc_upper_crossover_constant_d, warren_bound, Counting,
    WarrenCount, WarrenParams,
};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::class::HypothesisClass;
use crate::error::{Error, Result};

pub const DEFAULT_GAP_CONSTANT: f64 = 320.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleComplexity {
    pub samples: f64,
    /// Leading-order term only; the polylog(1/eps, 1/delta) factor is not
    /// evaluated.
    pub polylog_suppressed: bool,
    pub expression: String,
}

/// Leading-order sample count from the Natarajan dimension.
///
/// Upper: `ndim * log2|Y| / eps` (realizable) or `/ eps^2` (agnostic).
/// Lower drops the `log2|Y|` factor.
pub fn sample_complexity(
    ndim: f64,
    label_count: u64,
    eps: f64,
    delta: f64,
    agnostic: bool,
    side: Side,
) -> Result<SampleComplexity> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if label_count < 2 {
        return Err(Error::Domain("need at least two labels".into()));
    }
    if !(ndim >= 0.0) {
        return Err(Error::Domain(format!("dimension must be nonnegative, got {ndim}")));
    }
    let rate = if agnostic { eps * eps } else { eps };
    let eps_term = if agnostic { "eps^2" } else { "eps" };
    let (samples, expression) = match side {
        Side::Upper => (
            ndim * (label_count as f64).log2() / rate,
            format!("Ndim * log2|Y| / {eps_term} * polylog(1/eps, 1/delta)"),
        ),
        Side::Lower => (
            ndim / rate,
            format!("Ndim / {eps_term} * polylog(1/eps, 1/delta)"),
        ),
    };
    Ok(SampleComplexity {
        samples,
        polylog_suppressed: true,
        expression,
    })
}

/// Predicted generalization error `min(1/2, sqrt(n log2(k+1) / (c m)))`.
/// With no samples nothing beats a random guess, so `m = 0` gives 1/2.
pub fn predict_gap(n: usize, m: usize, k: usize, c: f64) -> f64 {
    if m == 0 {
        return 0.5;
    }
    let raw = (n as f64 * ((k + 1) as f64).log2() / (c * m as f64)).sqrt();
    raw.min(0.5)
}

/// Inputs to a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRequest {
    pub class: HypothesisClass,
    /// Use the fixed-dimension argument for l_p.
    pub constant_d: bool,
    pub n: usize,
    /// Number of negatives; 1 for triplets.
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub agnostic: bool,
}

/// Leading-order dimensions and sample counts for one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub request: BoundRequest,
    pub setting: String,
    /// Leading-order lower and upper dimension terms with unit constants.
    pub dim_lower: f64,
    pub dim_upper: f64,
    pub dim_lower_expr: &'static str,
    pub dim_upper_expr: &'static str,
    /// Certified query count beyond which no set is shattered.
    pub crossover: Option<u64>,
    pub samples_lower: SampleComplexity,
    pub samples_upper: SampleComplexity,
    pub notes: Vec<String>,
}

fn setting_name(req: &BoundRequest) -> String {
    match req.class {
        HypothesisClass::Lp { p, .. } if req.constant_d => format!("lp_constant_d(p={p})"),
        HypothesisClass::Lp { p, .. } if p % 2 == 0 => format!("lp_even(p={p})"),
        HypothesisClass::Lp { p, .. } => format!("lp_odd(p={p})"),
        other => other.name().to_string(),
    }
}

pub fn bound_report(req: BoundRequest) -> Result<BoundReport> {
    let class = req.class.validate()?;
    if req.n < 2 {
        return Err(Error::Domain(format!("need n >= 2 points, got {}", req.n)));
    }
    if req.k < 1 {
        return Err(Error::Domain("need k >= 1 negatives".into()));
    }
    if req.constant_d && !matches!(class, HypothesisClass::Lp { .. }) {
        return Err(Error::UnsupportedClass("constant-d applies to lp only".into()));
    }
    let n = req.n as f64;
    let log_n = n.log2();
    let (lower, upper, lower_expr, upper_expr) = match class {
        HypothesisClass::Lp { .. } if req.constant_d => (n, n, "n", "n"),
        HypothesisClass::Lp { p, d } => {
            let dt = n.min(d as f64);
            if p % 2 == 0 {
                (n * dt, n * dt, "n * min(n, d)", "n * min(n, d)")
            } else {
                let up = n * (d as f64 * log_n).min(n);
                (n * dt, up.max(n * dt), "n * min(n, d)", "n * min(d * log2 n, n)")
            }
        }
        HypothesisClass::Cosine { d } => {
            let dt = n.min(d as f64);
            (n * dt, n * dt, "n * min(n, d)", "n * min(n, d)")
        }
        HypothesisClass::Arbitrary | HypothesisClass::Metric => (n * n, n * n, "n^2", "n^2"),
        HypothesisClass::Tree => (n, n * log_n.max(1.0), "n", "n * log2 n"),
        HypothesisClass::ClassPartition => (n, n, "n", "n"),
        HypothesisClass::SeparatedL2 { alpha, .. } => {
            (n / alpha, n / (alpha * alpha), "n / alpha", "n / alpha^2 (up to log factors)")
        }
    };
    let crossover = if req.constant_d {
        let HypothesisClass::Lp { p, d } = class else { unreachable!() };
        Some(vc_upper_crossover_constant_d(req.n, d, p)?)
    } else {
        match vc_upper_crossover(req.n, class) {
            Ok(m) => Some(m),
            Err(Error::UnsupportedClass(_)) => None,
            Err(e) => return Err(e),
        }
    };
    let labels = req.k as u64 + 1;
    let samples_lower = sample_complexity(lower, labels, req.eps, req.delta, req.agnostic, Side::Lower)?;
    let samples_upper = sample_complexity(upper, labels, req.eps, req.delta, req.agnostic, Side::Upper)?;
    let mut notes = vec!["polylog(1/eps, 1/delta) factors are suppressed".to_string()];
    if req.k > 1 {
        notes.push(format!("k = {} negatives: upper bound carries log2(k+1)", req.k));
    }
    if crossover.is_none() {
        notes.push(format!("no counting crossover for {}", class.name()));
    }
    Ok(BoundReport {
        request: req,
        setting: setting_name(&req),
        dim_lower: lower,
        dim_upper: upper,
        dim_lower_expr: lower_expr,
        dim_upper_expr: upper_expr,
        crossover,
        samples_lower,
        samples_upper,
        notes,
    })
}

impl BoundReport {
    pub fn to_json(&self) -> Value {
        let r = &self.request;
        let (d, p, alpha) = match r.class {
            HypothesisClass::Lp { p, d } => (Some(d), Some(p), None),
            HypothesisClass::Cosine { d } => (Some(d), None, None),
            HypothesisClass::SeparatedL2 { d, alpha } => (Some(d), None, Some(alpha)),
            _ => (None, None, None),
        };
        json!({
            "setting": self.setting,
            "n": r.n,
            "d": d,
            "p": p,
            "alpha": alpha,
            "k": r.k,
            "eps": r.eps,
            "delta": r.delta,
            "agnostic": r.agnostic,
            "dim_lower": self.dim_lower,
            "dim_upper": self.dim_upper,
            "dim_lower_expr": self.dim_lower_expr,
            "dim_upper_expr": self.dim_upper_expr,
            "vc_upper_crossover": self.crossover,
            "samples_lower": self.samples_lower.samples,
            "samples_upper": self.samples_upper.samples,
            "samples_lower_expr": self.samples_lower.expression,
            "samples_upper_expr": self.samples_upper.expression,
            "polylog_suppressed": true,
            "predicted_gap_constant": DEFAULT_GAP_CONSTANT,
            "notes": self.notes,
        })
    }
}

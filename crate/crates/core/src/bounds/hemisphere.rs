//! Probability that randomly signed vectors miss the origin with their hull.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lp::{separating_system, zero_in_hull};
use crate::model::{rational_from_f64, rational_string, Rational};
use crate::seed::{child_rng, derive_seed, rng};

/// `2^{-(m-1)} sum_{k < l} C(m-1, k)`, clamped to 1.
pub fn hemisphere_bound(l: usize, m: usize) -> Result<Rational> {
    if l < 1 || m < 1 {
        return Err(Error::Domain(format!("need l, m >= 1, got l = {l}, m = {m}")));
    }
    let top = m - 1;
    let sum: BigUint = (0..l.min(m))
        .map(|k| binomial(BigUint::from(top), BigUint::from(k)))
        .sum();
    let q = Rational::new(sum.into(), (BigUint::one() << top).into());
    Ok(q.min(Rational::one()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HemisphereReport {
    pub trials: u64,
    pub misses: u64,
    pub miss_probability: f64,
    /// Three binomial standard errors.
    pub half_width: f64,
    pub distinct_patterns: usize,
    /// Patterns whose hull test disagreed with the separating-hyperplane
    /// system, when the duality check ran.
    pub duality_mismatches: Option<usize>,
}

impl HemisphereReport {
    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "misses": self.misses,
            "miss_probability": self.miss_probability,
            "half_width": self.half_width,
            "distinct_patterns": self.distinct_patterns,
            "duality_mismatches": self.duality_mismatches,
        })
    }
}

fn signs_for_trial(seed: u64, trial: u64, m: usize) -> Vec<bool> {
    let mut rng = child_rng(seed, trial);
    let mut signs: Vec<bool> = (0..m).map(|_| rng.random::<bool>()).collect();
    // s and -s give mirrored hulls, so count them as one pattern
    if signs.first() == Some(&false) {
        signs.iter_mut().for_each(|s| *s = !*s);
    }
    signs
}

/// Draw `trials` sign vectors and count how often the signed hull misses
/// the origin. Each distinct pattern is decided once with the exact LP.
pub fn hemisphere_monte_carlo(
    vectors: &[Vec<f64>],
    trials: u64,
    seed: u64,
    check_duality: bool,
) -> Result<HemisphereReport> {
    if vectors.is_empty() {
        return Err(Error::Domain("need at least one vector".into()));
    }
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let dim = vectors[0].len();
    if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Domain("vectors must share a positive dimension".into()));
    }
    if vectors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain("vectors must be finite".into()));
    }
    let exact: Vec<Vec<Rational>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| rational_from_f64(x)).collect())
        .collect();

    let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    let drawn: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| signs_for_trial(seed, t, vectors.len()))
        .collect();
    for signs in drawn {
        *counts.entry(signs).or_default() += 1;
    }

    let patterns: Vec<(&Vec<bool>, u64)> = counts.iter().map(|(k, &v)| (k, v)).collect();
    let decided: Vec<(bool, bool)> = patterns
        .par_iter()
        .map(|(signs, _)| -> Result<(bool, bool)> {
            let signed: Vec<Vec<Rational>> = exact
                .iter()
                .zip(signs.iter())
                .map(|(v, &s)| if s { v.clone() } else { v.iter().map(|x| -x).collect() })
                .collect();
            let miss = !zero_in_hull(&signed)?;
            let agrees = if check_duality {
                separating_system(&signed).is_strictly_feasible()? == miss
            } else {
                true
            };
            Ok((miss, agrees))
        })
        .collect::<Result<_>>()?;

    let misses: u64 = patterns
        .iter()
        .zip(&decided)
        .filter(|(_, (miss, _))| *miss)
        .map(|((_, count), _)| count)
        .sum();
    let p = misses as f64 / trials as f64;
    Ok(HemisphereReport {
        trials,
        misses,
        miss_probability: p,
        half_width: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
        distinct_patterns: patterns.len(),
        duality_mismatches: check_duality.then(|| decided.iter().filter(|(_, ok)| !ok).count()),
    })
}

/// How test vectors are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorLayout {
    /// Independent uniform unit vectors (general position almost surely).
    Generic,
    /// `ceil(m / 2)` generic unit vectors, each used twice in turn.
    Repeated,
    /// Nonzero multiples of a single unit vector.
    Collinear,
}

fn unit_vector<R: Rng>(rng: &mut R, l: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..l)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `m` seeded vectors in dimension `l`.
pub fn sample_vectors(layout: VectorLayout, l: usize, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if l < 1 || m < 1 {
        return Err(Error::Domain(format!("need l, m >= 1, got l = {l}, m = {m}")));
    }
    let mut rng = rng(derive_seed(seed, 0));
    Ok(match layout {
        VectorLayout::Generic => (0..m).map(|_| unit_vector(&mut rng, l)).collect(),
        VectorLayout::Repeated => {
            let pool: Vec<Vec<f64>> = (0..m.div_ceil(2)).map(|_| unit_vector(&mut rng, l)).collect();
            (0..m).map(|i| pool[i / 2].clone()).collect()
        }
        VectorLayout::Collinear => {
            let u = unit_vector(&mut rng, l);
            (0..m)
                .map(|_| {
                    let scale = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                    u.iter().map(|x| scale * x).collect()
                })
                .collect()
        }
    })
}

/// Monte Carlo run on [`sample_vectors`], with the sign draws on a seed
/// stream separate from the vectors.
pub fn hemisphere_experiment(
    layout: VectorLayout,
    l: usize,
    m: usize,
    trials: u64,
    seed: u64,
    check_duality: bool,
) -> Result<HemisphereReport> {
    let vectors = sample_vectors(layout, l, m, seed)?;
    hemisphere_monte_carlo(&vectors, trials, derive_seed(seed, 1), check_duality)
}

/// Report helper for the closed form alongside a simulation.
pub fn bound_json(l: usize, m: usize) -> Result<Value> {
    let q = hemisphere_bound(l, m)?;
    Ok(json!({
        "exact": rational_string(&q),
        "value": q.to_f64().unwrap_or(f64::NAN),
    }))
}

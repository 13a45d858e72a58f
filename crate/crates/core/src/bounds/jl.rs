//! Johnson-Lindenstrauss target dimensions and an empirical projection check.
//!
//! Logarithms are natural.

use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::seed::rng;

fn check_unit_open(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {x}")))
    }
}

fn ceil_dimension(n: usize, constant: f64, eps: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 points, got {n}")));
    }
    Ok((constant * (n as f64).ln() / (eps * eps)).ceil() as usize)
}

/// Dimension used by the separated-l2 reduction: `ceil(1000 ln n / alpha^2)`.
pub fn jl_dimension(n: usize, alpha: f64) -> Result<usize> {
    check_unit_open("alpha", alpha)?;
    ceil_dimension(n, 1000.0, alpha)
}

/// Dimension from the Johnson-Lindenstrauss bound: `ceil(15 ln n / beta^2)`.
pub fn jl_lemma_dimension(n: usize, beta: f64) -> Result<usize> {
    check_unit_open("beta", beta)?;
    ceil_dimension(n, 15.0, beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distortion {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl Distortion {
    /// Worst multiplicative distortion, at least 1.
    pub fn worst(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }

    pub fn within(&self, beta: f64) -> bool {
        self.min_ratio >= 1.0 - beta && self.max_ratio <= 1.0 + beta
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Extreme ratios of projected to original pairwise l2 distances. Pairs of
/// coincident original points are skipped.
pub fn distortion(original: &[Vec<f64>], projected: &[Vec<f64>]) -> Result<Distortion> {
    if original.len() != projected.len() {
        return Err(Error::Domain("original and projected point counts differ".into()));
    }
    let mut out = Distortion {
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
    };
    for i in 0..original.len() {
        for j in i + 1..original.len() {
            let before = l2(&original[i], &original[j]);
            if before == 0.0 {
                continue;
            }
            let ratio = l2(&projected[i], &projected[j]) / before;
            out.min_ratio = out.min_ratio.min(ratio);
            out.max_ratio = out.max_ratio.max(ratio);
        }
    }
    if out.max_ratio == 0.0 && out.min_ratio.is_infinite() {
        out.min_ratio = 1.0;
        out.max_ratio = 1.0;
    }
    Ok(out)
}

pub fn validate_points(points: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::Domain("need at least one point".into()));
    };
    let dim = first.len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::Domain("points must share a positive dimension".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain("coordinates must be finite".into()));
    }
    Ok(dim)
}

/// Project through a seeded `d1 x d` Gaussian matrix scaled by `1/sqrt(d1)`.
pub fn gaussian_projection(points: &[Vec<f64>], d1: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let dim = validate_points(points)?;
    if d1 == 0 {
        return Err(Error::Domain("target dimension must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let scale = 1.0 / (d1 as f64).sqrt();
    let matrix: Vec<Vec<f64>> = (0..d1)
        .map(|_| {
            (0..dim)
                .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect()
        })
        .collect();
    Ok(points
        .iter()
        .map(|p| {
            matrix
                .iter()
                .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JlReport {
    pub d1: usize,
    pub beta: f64,
    pub distortion: Distortion,
}

impl JlReport {
    pub fn within(&self) -> bool {
        self.distortion.within(self.beta)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d1": self.d1,
            "beta": self.beta,
            "log_base": "e",
            "min_ratio": self.distortion.min_ratio,
            "max_ratio": self.distortion.max_ratio,
            "max_distortion": self.distortion.worst(),
            "within": self.within(),
        })
    }
}

/// Project `points` to `d1` dimensions (default from [`jl_lemma_dimension`])
/// and measure the distortion.
pub fn jl_check(points: &[Vec<f64>], beta: f64, d1: Option<usize>, seed: u64) -> Result<JlReport> {
    check_unit_open("beta", beta)?;
    validate_points(points)?;
    let d1 = match d1 {
        Some(d) => d,
        None => jl_lemma_dimension(points.len().max(2), beta)?,
    };
    let projected = gaussian_projection(points, d1, seed)?;
    Ok(JlReport {
        d1,
        beta,
        distortion: distortion(points, &projected)?,
    })
}

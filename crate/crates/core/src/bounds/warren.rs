//! Warren's bound on sign patterns and the resulting VC upper-bound crossovers.

use num_bigint::BigUint;
use serde_json::{json, Value};

use super::fixed::{log2_e, log2_u64, log2_uint, Fixed};
use crate::class::HypothesisClass;
use crate::error::{Error, Result};

/// `m` polynomials of degree at most `k` in `l` variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarrenParams {
    pub m: u64,
    pub l: u64,
    pub k: u64,
}

impl WarrenParams {
    pub fn validate(self) -> Result<Self> {
        if self.l < 2 {
            return Err(Error::Domain(format!("need l >= 2 variables, got {}", self.l)));
        }
        if self.m < self.l {
            return Err(Error::Domain(format!(
                "need m >= l, got m = {} and l = {}",
                self.m, self.l
            )));
        }
        if self.k < 1 {
            return Err(Error::Domain("degree k must be at least 1".into()));
        }
        Ok(self)
    }
}

/// `(4ekm/l)^l`, held as its base-2 logarithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarrenCount {
    log2: Fixed,
}

impl WarrenCount {
    pub fn log2(&self) -> &Fixed {
        &self.log2
    }

    pub fn log2_f64(&self) -> f64 {
        self.log2.to_f64()
    }

    /// The count as a float; infinite once it leaves the f64 range.
    pub fn value_f64(&self) -> f64 {
        self.log2_f64().exp2()
    }

    pub fn to_json(&self) -> Value {
        json!({ "log2": self.log2_f64(), "value": finite_or_null(self.value_f64()) })
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// `l * log2(4ekm/l)` without domain checks.
fn warren_log2(m: u64, l: u64, k: u64) -> Fixed {
    let per_var = Fixed::from_int(2) + log2_e() + log2_u64(k) + log2_u64(m) - log2_u64(l);
    per_var * l
}

pub fn warren_bound(params: WarrenParams) -> Result<WarrenCount> {
    let WarrenParams { m, l, k } = params.validate()?;
    Ok(WarrenCount {
        log2: warren_log2(m, l, k),
    })
}

/// A counting argument: `variables` unknowns, degree `degree`, each query
/// contributing `2^per_query_log2` polynomials, summed over `2^factor_log2`
/// enumerated structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counting {
    pub variables: u64,
    pub degree: u64,
    pub per_query_log2: u64,
    pub factor_log2: Fixed,
}

impl Counting {
    /// log2 of the number of realizable sign patterns of `m` queries.
    pub fn patterns_log2(&self, m: u64) -> Fixed {
        let polys = Fixed::from_int(self.per_query_log2) * self.variables;
        warren_log2(m, self.variables, self.degree) + polys + self.factor_log2.clone()
    }

    fn shatter_refuted(&self, m: u64) -> bool {
        self.patterns_log2(m).cmp_int(m).is_lt()
    }

    /// Smallest `m` with `2^m` above the pattern count. The predicate is
    /// false at `m = variables` and monotone beyond it, so doubling then
    /// bisecting finds the boundary.
    pub fn crossover(&self) -> u64 {
        let mut lo = self.variables.max(1);
        if self.shatter_refuted(lo) {
            return lo;
        }
        let mut hi = lo * 2;
        while !self.shatter_refuted(hi) {
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.shatter_refuted(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn to_u64(v: usize) -> u64 {
    v as u64
}

/// The counting argument behind the upper bound for `class` on `n` points.
/// `None` when the bound is direct (arbitrary and metric distances).
pub fn counting_for(n: usize, class: HypothesisClass, constant_d: bool) -> Result<Option<Counting>> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 points, got {n}")));
    }
    let n64 = to_u64(n);
    let class = class.validate()?;
    let lp = |p: u32, d: usize| {
        let nd = n64 * to_u64(d);
        let odd = p % 2 == 1;
        if constant_d {
            // each comparison splits into 2^{2d} sign-definite polynomials
            return Ok(Some(Counting {
                variables: nd,
                degree: u64::from(p),
                per_query_log2: 2 * to_u64(d),
                factor_log2: Fixed::zero(),
            }));
        }
        let factor_log2 = if odd {
            // orderings per coordinate, at most n^{nd} in total
            log2_u64(n64) * nd
        } else {
            Fixed::zero()
        };
        Ok(Some(Counting {
            variables: nd,
            degree: u64::from(p),
            per_query_log2: 0,
            factor_log2,
        }))
    };
    match class {
        HypothesisClass::Arbitrary | HypothesisClass::Metric => Ok(None),
        HypothesisClass::Lp { p, d } => lp(p, d),
        HypothesisClass::Cosine { d } => lp(2, d),
        HypothesisClass::Tree => {
            if constant_d {
                return Err(Error::UnsupportedClass("constant-d applies to lp only".into()));
            }
            // 2 (2n)^{2n-2} labeled topologies, at most 2n - 1 edge weights
            let two_n = BigUint::from(2 * n64);
            let factor_log2 = Fixed::from_int(1) + log2_uint(&two_n) * (2 * n64 - 2);
            Ok(Some(Counting {
                variables: 2 * n64 - 1,
                degree: 1,
                per_query_log2: 0,
                factor_log2,
            }))
        }
        HypothesisClass::ClassPartition | HypothesisClass::SeparatedL2 { .. } => Err(
            Error::UnsupportedClass(format!("no counting argument for {}", class.name())),
        ),
    }
}

/// Smallest query count that no set of that size can be shattered by
/// `class` on `n` points.
pub fn vc_upper_crossover(n: usize, class: HypothesisClass) -> Result<u64> {
    match counting_for(n, class, false)? {
        Some(c) => Ok(c.crossover()),
        None => Ok(to_u64(n) * to_u64(n)),
    }
}

/// Crossover for l_p in fixed dimension, where each query is split into
/// `2^{2d}` polynomials instead of enumerating orderings.
pub fn vc_upper_crossover_constant_d(n: usize, d: usize, p: u32) -> Result<u64> {
    let c = counting_for(n, HypothesisClass::Lp { p, d }, true)?
        .expect("lp always has a counting argument");
    Ok(c.crossover())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain float linear scan for the smallest `m >= start` with
    /// `m > l * log2(4ekm'/l) + factor`, `m' = per_query * m`.
    fn scan(l: f64, k: f64, per_query: f64, factor: f64, start: u64) -> u64 {
        let e = std::f64::consts::E;
        (start..)
            .find(|&m| m as f64 > l * (4.0 * e * k * per_query * m as f64 / l).log2() + factor)
            .unwrap()
    }

    #[test]
    fn warren_examples() {
        let e = std::f64::consts::E;
        let a = warren_bound(WarrenParams { m: 2, l: 2, k: 1 }).unwrap();
        assert!((a.value_f64() - (4.0 * e).powi(2)).abs() < 1e-9);
        assert!((a.value_f64() - 118.2).abs() < 0.1);
        let b = warren_bound(WarrenParams { m: 2, l: 2, k: 2 }).unwrap();
        assert!((b.value_f64() - (8.0 * e).powi(2)).abs() < 1e-9);
        assert!((b.value_f64() - 472.7).abs() < 0.5);
        let lo = warren_bound(WarrenParams { m: 100, l: 8, k: 2 }).unwrap();
        let hi = warren_bound(WarrenParams { m: 200, l: 8, k: 2 }).unwrap();
        assert!(lo.log2() < hi.log2());
    }

    #[test]
    fn warren_domain() {
        for (m, l, k) in [(1, 2, 1), (5, 1, 1), (5, 2, 0)] {
            assert!(matches!(
                warren_bound(WarrenParams { m, l, k }),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn even_golden() {
        let got = vc_upper_crossover(4, HypothesisClass::Lp { p: 2, d: 2 }).unwrap();
        assert_eq!(got, scan(8.0, 2.0, 1.0, 0.0, 8));
        assert_eq!(got, 59);
    }

    #[test]
    fn tree_golden() {
        let got = vc_upper_crossover(3, HypothesisClass::Tree).unwrap();
        let factor = (2.0 * 6f64.powi(4)).log2();
        assert_eq!(got, scan(5.0, 1.0, 1.0, factor, 5));
    }

    #[test]
    fn odd_and_constant_d_match_scan() {
        let got = vc_upper_crossover(5, HypothesisClass::Lp { p: 3, d: 2 }).unwrap();
        assert_eq!(got, scan(10.0, 3.0, 1.0, 10.0 * 5f64.log2(), 10));
        let got = vc_upper_crossover_constant_d(6, 2, 2).unwrap();
        assert_eq!(got, scan(12.0, 2.0, 16.0, 0.0, 12));
    }

    #[test]
    fn direct_and_unsupported() {
        assert_eq!(vc_upper_crossover(10, HypothesisClass::Arbitrary).unwrap(), 100);
        assert_eq!(vc_upper_crossover(7, HypothesisClass::Metric).unwrap(), 49);
        assert!(matches!(
            vc_upper_crossover(5, HypothesisClass::ClassPartition),
            Err(Error::UnsupportedClass(_))
        ));
        assert_eq!(
            vc_upper_crossover(5, HypothesisClass::Cosine { d: 3 }).unwrap(),
            vc_upper_crossover(5, HypothesisClass::Lp { p: 2, d: 3 }).unwrap()
        );
    }
}

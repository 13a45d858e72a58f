//! Exact linear feasibility: strict homogeneous systems and origin-in-hull tests.

mod simplex;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::Rational;
use simplex::{Outcome, Program, Relation, Row};

/// Linear constraints over `vars` rational unknowns.
///
/// The strict rows `a . x > 0` are the ones the realizability checkers
/// produce; the optional non-strict and equality rows are side constraints.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    vars: usize,
    strict: Vec<Vec<Rational>>,
    at_least: Vec<(Vec<Rational>, Rational)>,
    equal: Vec<(Vec<Rational>, Rational)>,
    nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrictSolution {
    pub feasible: bool,
    /// Point meeting every strict row with positive slack.
    pub witness: Option<Vec<Rational>>,
}

impl LinearSystem {
    pub fn new(vars: usize) -> Self {
        LinearSystem {
            vars,
            nonneg: vec![false; vars],
            ..Default::default()
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn strict_rows(&self) -> &[Vec<Rational>] {
        &self.strict
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonneg = vec![true; self.vars];
        self
    }

    pub fn set_nonnegative(&mut self, var: usize) {
        self.nonneg[var] = true;
    }

    /// `row . x > 0`
    pub fn push_strict(&mut self, row: Vec<Rational>) {
        self.strict.push(row);
    }

    /// `row . x >= rhs`
    pub fn push_at_least(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.at_least.push((row, rhs));
    }

    /// `row . x == rhs`
    pub fn push_equal(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.equal.push((row, rhs));
    }

    fn check_widths(&self) -> Result<()> {
        let bad = self.strict.iter().any(|r| r.len() != self.vars)
            || self.at_least.iter().any(|(r, _)| r.len() != self.vars)
            || self.equal.iter().any(|(r, _)| r.len() != self.vars);
        if bad || self.nonneg.len() != self.vars {
            return Err(Error::MalformedSystem(format!(
                "every row must have {} coefficients",
                self.vars
            )));
        }
        Ok(())
    }

    /// Column layout after splitting free variables into `x+ - x-`.
    fn columns(&self) -> Vec<(usize, bool)> {
        let mut cols = Vec::new();
        for v in 0..self.vars {
            cols.push((v, true));
            if !self.nonneg[v] {
                cols.push((v, false));
            }
        }
        cols
    }

    fn expand(cols: &[(usize, bool)], row: &[Rational]) -> Vec<Rational> {
        cols.iter()
            .map(|&(v, positive)| {
                if positive {
                    row[v].clone()
                } else {
                    -&row[v]
                }
            })
            .collect()
    }

    fn collapse(&self, cols: &[(usize, bool)], x: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.vars];
        for (&(v, positive), value) in cols.iter().zip(x) {
            if positive {
                out[v] += value;
            } else {
                out[v] -= value;
            }
        }
        out
    }

    fn side_rows(&self, cols: &[(usize, bool)], extra: usize) -> Vec<Row> {
        let pad = |mut r: Vec<Rational>| {
            r.resize(r.len() + extra, Rational::zero());
            r
        };
        let mut rows = Vec::new();
        for (r, b) in &self.at_least {
            rows.push(Row {
                coeffs: pad(Self::expand(cols, r)),
                relation: Relation::Ge,
                rhs: b.clone(),
            });
        }
        for (r, b) in &self.equal {
            rows.push(Row {
                coeffs: pad(Self::expand(cols, r)),
                relation: Relation::Eq,
                rhs: b.clone(),
            });
        }
        rows
    }

    /// Maximize a margin `t` with `a . x >= t` on strict rows and `t <= 1`.
    /// Returns the optimal point and margin, or `None` if the side
    /// constraints alone are infeasible.
    fn max_margin(&self) -> Option<(Vec<Rational>, Rational)> {
        let cols = self.columns();
        let width = cols.len();
        // margin t = t+ - t-, both appended after the structural columns
        let mut rows = self.side_rows(&cols, 2);
        for r in &self.strict {
            let mut coeffs = Self::expand(&cols, r);
            coeffs.push(-Rational::one());
            coeffs.push(Rational::one());
            rows.push(Row {
                coeffs,
                relation: Relation::Ge,
                rhs: Rational::zero(),
            });
        }
        let mut cap = vec![Rational::zero(); width];
        cap.push(Rational::one());
        cap.push(-Rational::one());
        rows.push(Row {
            coeffs: cap,
            relation: Relation::Le,
            rhs: Rational::one(),
        });
        let mut objective = vec![Rational::zero(); width];
        objective.push(Rational::one());
        objective.push(-Rational::one());
        let program = Program {
            vars: width + 2,
            objective,
            rows,
        };
        match program.solve() {
            Outcome::Optimal { x, value } => Some((self.collapse(&cols, &x[..width]), value)),
            Outcome::Infeasible => None,
            Outcome::Unbounded => unreachable!("margin is capped at 1"),
        }
    }

    /// Decide strict feasibility without producing a polished witness.
    pub fn is_strictly_feasible(&self) -> Result<bool> {
        self.check_widths()?;
        Ok(matches!(self.max_margin(), Some((_, t)) if t.is_positive()))
    }

    /// Decide whether some `x` meets every strict row with positive slack
    /// (plus the side constraints), exactly.
    ///
    /// For purely homogeneous systems over nonnegative variables the witness
    /// is the minimum-sum point with every strict row and every variable at
    /// least 1 (strict rows are open, so feasibility with `x >= 0` already
    /// implies feasibility with `x > 0`).
    pub fn strict_feasible(&self) -> Result<StrictSolution> {
        self.check_widths()?;
        let Some((x, t)) = self.max_margin() else {
            return Ok(StrictSolution {
                feasible: false,
                witness: None,
            });
        };
        if !t.is_positive() {
            return Ok(StrictSolution {
                feasible: false,
                witness: None,
            });
        }
        let homogeneous = self.at_least.is_empty() && self.equal.is_empty();
        let witness = if homogeneous && self.nonneg.iter().all(|&b| b) {
            self.min_sum_witness().unwrap_or(x)
        } else {
            x
        };
        Ok(StrictSolution {
            feasible: true,
            witness: Some(witness),
        })
    }

    fn min_sum_witness(&self) -> Option<Vec<Rational>> {
        let mut rows: Vec<Row> = self
            .strict
            .iter()
            .map(|r| Row {
                coeffs: r.clone(),
                relation: Relation::Ge,
                rhs: Rational::one(),
            })
            .collect();
        for v in 0..self.vars {
            let mut coeffs = vec![Rational::zero(); self.vars];
            coeffs[v] = Rational::one();
            rows.push(Row {
                coeffs,
                relation: Relation::Ge,
                rhs: Rational::one(),
            });
        }
        let program = Program {
            vars: self.vars,
            objective: vec![-Rational::one(); self.vars],
            rows,
        };
        match program.solve() {
            Outcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

/// Whether the origin lies in the convex hull of `vectors`, exactly.
pub fn zero_in_hull(vectors: &[Vec<Rational>]) -> Result<bool> {
    let Some(first) = vectors.first() else {
        return Err(Error::MalformedSystem("empty vector list".into()));
    };
    let dim = first.len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::MalformedSystem("vectors differ in width".into()));
    }
    let m = vectors.len();
    let mut rows = vec![Row {
        coeffs: vec![Rational::one(); m],
        relation: Relation::Eq,
        rhs: Rational::one(),
    }];
    for c in 0..dim {
        rows.push(Row {
            coeffs: vectors.iter().map(|v| v[c].clone()).collect(),
            relation: Relation::Eq,
            rhs: Rational::zero(),
        });
    }
    let program = Program {
        vars: m,
        objective: vec![Rational::zero(); m],
        rows,
    };
    Ok(matches!(program.solve(), Outcome::Optimal { .. }))
}

/// The strict system `{u : u . v > 0 for all v}` whose feasibility is the
/// separating-hyperplane dual of [`zero_in_hull`].
pub fn separating_system(vectors: &[Vec<Rational>]) -> LinearSystem {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut sys = LinearSystem::new(dim);
    for v in vectors {
        sys.push_strict(v.clone());
    }
    sys
}

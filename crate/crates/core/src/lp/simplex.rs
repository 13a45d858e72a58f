//! Dense two-phase tableau simplex over arbitrary-precision rationals.
//!
//! All variables are nonnegative. Pivoting follows Bland's rule (lowest
//! eligible column enters, lowest basic index leaves on ratio ties), so the
//! method terminates on degenerate systems.

use num_traits::{One, Signed, Zero};

use crate::model::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Maximize `objective . x` subject to `rows`, `x >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub vars: usize,
    pub objective: Vec<Rational>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    // rows x (cols + 1); last column is the right-hand side
    cells: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
}

impl Tableau {
    fn cols(&self) -> usize {
        self.kinds.len()
    }

    fn rhs(&self, row: usize) -> &Rational {
        &self.cells[row][self.cols()]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cols() + 1;
        let inv = self.cells[row][col].recip();
        if !inv.is_one() {
            for j in 0..width {
                if !self.cells[row][j].is_zero() {
                    self.cells[row][j] *= &inv;
                }
            }
        }
        let pivot_row = self.cells[row].clone();
        for (i, r) in self.cells.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for j in 0..width {
                if !pivot_row[j].is_zero() {
                    r[j] -= &factor * &pivot_row[j];
                }
            }
        }
        self.basis[row] = col;
    }

    /// Run primal simplex maximizing `cost . x` over columns accepted by
    /// `eligible`. Returns false on unboundedness.
    fn optimize(&mut self, cost: &[Rational], eligible: impl Fn(usize) -> bool) -> bool {
        let cols = self.cols();
        let mut in_basis = vec![false; cols];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        loop {
            // Bland: first column with positive reduced cost enters
            let mut entering = None;
            for j in 0..cols {
                if in_basis[j] || !eligible(j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    let a = &self.cells[i][j];
                    if !cost[b].is_zero() && !a.is_zero() {
                        reduced -= &cost[b] * a;
                    }
                }
                if reduced.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };

            let mut leaving: Option<(usize, Rational)> = None;
            for i in 0..self.cells.len() {
                let a = &self.cells[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leaving {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else { return false };
            in_basis[self.basis[row]] = false;
            in_basis[col] = true;
            self.pivot(row, col);
        }
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| !cost[b].is_zero())
            .map(|(i, &b)| &cost[b] * self.rhs(i))
            .fold(Rational::zero(), |s, t| s + t)
    }
}

impl Program {
    pub fn solve(&self) -> Outcome {
        let vars = self.vars;
        let mut kinds = vec![ColumnKind::Structural; vars];
        let mut cells: Vec<Vec<Rational>> = Vec::with_capacity(self.rows.len());
        let mut basis = Vec::with_capacity(self.rows.len());
        // (row, column kind) for the extra column each row needs
        let mut extras: Vec<(usize, Rational, ColumnKind)> = Vec::new();

        for (i, row) in self.rows.iter().enumerate() {
            assert_eq!(row.coeffs.len(), vars, "row width mismatch");
            let mut coeffs = row.coeffs.clone();
            let mut rhs = row.rhs.clone();
            let mut relation = row.relation;
            if rhs.is_negative() {
                coeffs.iter_mut().for_each(|c| *c = -&*c);
                rhs = -rhs;
                relation = match relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            // a homogeneous >= row is a <= row after negation, which needs no artificial
            if relation == Relation::Ge && rhs.is_zero() {
                coeffs.iter_mut().for_each(|c| *c = -&*c);
                relation = Relation::Le;
            }
            match relation {
                Relation::Le => extras.push((i, Rational::one(), ColumnKind::Slack)),
                Relation::Ge => {
                    extras.push((i, -Rational::one(), ColumnKind::Slack));
                    extras.push((i, Rational::one(), ColumnKind::Artificial));
                }
                Relation::Eq => extras.push((i, Rational::one(), ColumnKind::Artificial)),
            }
            coeffs.push(rhs);
            cells.push(coeffs);
            basis.push(usize::MAX);
        }

        let total = vars + extras.len();
        for row in cells.iter_mut() {
            let rhs = row.pop().expect("rhs");
            row.resize(total, Rational::zero());
            row.push(rhs);
        }
        for (k, (row, coeff, kind)) in extras.into_iter().enumerate() {
            let col = vars + k;
            kinds.push(kind);
            cells[row][col] = coeff.clone();
            if coeff.is_positive() {
                basis[row] = col;
            }
        }

        let mut t = Tableau {
            cells,
            basis,
            kinds,
        };

        let has_artificial = t.kinds.contains(&ColumnKind::Artificial);
        if has_artificial {
            let phase1: Vec<Rational> = t
                .kinds
                .iter()
                .map(|k| {
                    if *k == ColumnKind::Artificial {
                        -Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            t.optimize(&phase1, |_| true);
            if t.value(&phase1).is_negative() {
                return Outcome::Infeasible;
            }
            // drive zero-valued artificials out of the basis
            let mut i = 0;
            while i < t.cells.len() {
                if t.kinds[t.basis[i]] == ColumnKind::Artificial {
                    let replacement = (0..t.cols()).find(|&j| {
                        t.kinds[j] != ColumnKind::Artificial && !t.cells[i][j].is_zero()
                    });
                    match replacement {
                        Some(j) => t.pivot(i, j),
                        None => {
                            // redundant row
                            t.cells.remove(i);
                            t.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        let mut cost = self.objective.clone();
        cost.resize(t.cols(), Rational::zero());
        let kinds = t.kinds.clone();
        if !t.optimize(&cost, |j| kinds[j] != ColumnKind::Artificial) {
            return Outcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); vars];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < vars {
                x[b] = t.rhs(i).clone();
            }
        }
        let value = t.value(&cost);
        Outcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn row(c: &[i64], relation: Relation, rhs: i64) -> Row {
        Row {
            coeffs: c.iter().map(|&v| r(v)).collect(),
            relation,
            rhs: r(rhs),
        }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = Program {
            vars: 2,
            objective: vec![r(3), r(5)],
            rows: vec![
                row(&[1, 0], Relation::Le, 4),
                row(&[0, 2], Relation::Le, 12),
                row(&[3, 2], Relation::Le, 18),
            ],
        };
        assert_eq!(
            lp.solve(),
            Outcome::Optimal {
                x: vec![r(2), r(6)],
                value: r(36)
            }
        );
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = Program {
            vars: 1,
            objective: vec![r(1)],
            rows: vec![row(&[1], Relation::Ge, 2), row(&[1], Relation::Le, 1)],
        };
        assert_eq!(lp.solve(), Outcome::Infeasible);
        let lp = Program {
            vars: 1,
            objective: vec![r(1)],
            rows: vec![row(&[1], Relation::Ge, 2)],
        };
        assert_eq!(lp.solve(), Outcome::Unbounded);
    }

    #[test]
    fn equality_with_redundant_row() {
        // x + y = 2 twice, min x (max -x) -> x = 0, y = 2
        let lp = Program {
            vars: 2,
            objective: vec![r(-1), r(0)],
            rows: vec![row(&[1, 1], Relation::Eq, 2), row(&[2, 2], Relation::Eq, 4)],
        };
        match lp.solve() {
            Outcome::Optimal { x, value } => {
                assert_eq!(x, vec![r(0), r(2)]);
                assert_eq!(value, r(0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_normalized() {
        // -x <= -3 means x >= 3; min x
        let lp = Program {
            vars: 1,
            objective: vec![r(-1)],
            rows: vec![row(&[-1], Relation::Le, -3)],
        };
        assert_eq!(
            lp.solve(),
            Outcome::Optimal {
                x: vec![r(3)],
                value: r(-3)
            }
        );
    }
}

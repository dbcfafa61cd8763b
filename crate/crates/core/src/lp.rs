//! Exact two-phase simplex over Q with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

/// maximize `objective . x` subject to `eq` rows (`a . x = b`), `le` rows (`a . x <= b`), `x >= 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub eq: Vec<(Vec<Rational>, Rational)>,
    pub le: Vec<(Vec<Rational>, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    // reduced costs d_j = c_B B^-1 A_j - c_j, with the objective value in the last slot
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn set_objective(&mut self, cost: &[Rational]) {
        let mut obj: Vec<Rational> = (0..=self.width)
            .map(|j| if j < self.width { -cost[j].clone() } else { Rational::zero() })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(&self.rows[i]) {
                if !t.is_zero() {
                    *o = &*o + &cost[b] * t;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let inv = self.rows[p][q].recip();
        for x in self.rows[p].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[p]);
        let support: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            if row[q].is_zero() {
                return;
            }
            let f = row[q].clone();
            for &j in &support {
                row[j] = &row[j] - &f * &pivot_row[j];
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[p] = pivot_row;
        self.basis[p] = q;
    }

    /// Runs the simplex on the current objective row; `None` if unbounded.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> Option<()> {
        loop {
            let Some(q) = (0..self.width).find(|&j| allowed(j) && self.obj[j].is_negative()) else {
                return Some(());
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((r, _, b)) => ratio < *r || (ratio == *r && self.basis[i] < *b),
                };
                if better {
                    best = Some((ratio, i, self.basis[i]));
                }
            }
            let (_, p, _) = best?;
            self.pivot(p, q);
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> LpOutcome {
        let nv = self.num_vars;
        let m_le = self.le.len();
        let m = m_le + self.eq.len();
        // columns: x (nv), slacks (m_le), artificials (one per row that needs it)
        let mut rows: Vec<(Vec<Rational>, Rational, Option<usize>)> = Vec::with_capacity(m);
        for (k, (a, b)) in self.le.iter().enumerate() {
            rows.push((a.clone(), b.clone(), Some(k)));
        }
        for (a, b) in &self.eq {
            rows.push((a.clone(), b.clone(), None));
        }
        let needs_art: Vec<bool> = rows
            .iter()
            .map(|(_, b, slack)| slack.is_none() || b.is_negative())
            .collect();
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let width = nv + m_le + n_art;
        let mut tab_rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art = nv + m_le;
        for (i, (a, b, slack)) in rows.into_iter().enumerate() {
            let sign = if b.is_negative() { -Rational::one() } else { Rational::one() };
            let mut row = vec![Rational::zero(); width + 1];
            for (j, v) in a.iter().enumerate() {
                row[j] = v * &sign;
            }
            if let Some(k) = slack {
                row[nv + k] = sign.clone();
            }
            row[width] = b * &sign;
            if needs_art[i] {
                row[art] = Rational::one();
                basis.push(art);
                art += 1;
            } else {
                basis.push(nv + slack.expect("slack row"));
            }
            tab_rows.push(row);
        }
        let mut tab = Tableau { rows: tab_rows, obj: Vec::new(), basis, width };
        let first_art = nv + m_le;

        if n_art > 0 {
            let cost: Vec<Rational> = (0..width)
                .map(|j| if j >= first_art { -Rational::one() } else { Rational::zero() })
                .collect();
            tab.set_objective(&cost);
            tab.optimize(&|_| true).expect("phase one is bounded");
            if !tab.obj[width].is_zero() {
                return LpOutcome::Infeasible;
            }
            for i in 0..m {
                if tab.basis[i] < first_art {
                    continue;
                }
                if let Some(q) = (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, q);
                }
            }
        }

        let mut cost = self.objective.clone();
        cost.resize(width, Rational::zero());
        tab.set_objective(&cost);
        if tab.optimize(&|j| j < first_art).is_none() {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); nv];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < nv {
                x[b] = tab.rhs(i).clone();
            }
        }
        let value = x
            .iter()
            .zip(&self.objective)
            .fold(Rational::zero(), |acc, (a, c)| acc + a * c);
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = LinearProgram {
            num_vars: 2,
            objective: v(&[3, 5]),
            eq: vec![],
            le: vec![(v(&[1, 0]), int(4)), (v(&[0, 2]), int(12)), (v(&[3, 2]), int(18))],
        };
        assert_eq!(lp.solve(), LpOutcome::Optimal { x: v(&[2, 6]), value: int(36) });
    }

    #[test]
    fn equality_and_fraction() {
        // max y, x + y = 1, y - 2x <= 0 -> y = 2/3
        let lp = LinearProgram {
            num_vars: 2,
            objective: v(&[0, 1]),
            eq: vec![(v(&[1, 1]), int(1))],
            le: vec![(v(&[-2, 1]), int(0))],
        };
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            num_vars: 1,
            objective: v(&[1]),
            eq: vec![(v(&[1]), int(2))],
            le: vec![(v(&[1]), int(1))],
        };
        assert_eq!(infeasible.solve(), LpOutcome::Infeasible);
        let unbounded = LinearProgram {
            num_vars: 2,
            objective: v(&[1, 0]),
            eq: vec![],
            le: vec![(v(&[-1, 1]), int(1))],
        };
        assert_eq!(unbounded.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_rows() {
        // x >= 2 written as -x <= -2; min x = max -x -> x = 2
        let lp = LinearProgram {
            num_vars: 1,
            objective: v(&[-1]),
            eq: vec![],
            le: vec![(v(&[-1]), int(-2)), (v(&[1]), int(5))],
        };
        assert_eq!(lp.solve(), LpOutcome::Optimal { x: v(&[2]), value: int(-2) });
    }
}

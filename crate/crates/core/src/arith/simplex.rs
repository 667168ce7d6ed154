//! Exact two-phase simplex for feasibility of linear constraint systems with
//! strict inequalities. Used where Fourier–Motzkin would blow up.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::eval::Env;
use super::linear::{Constraint, Feasibility, Rel};
use crate::ast::{Rat, Var};

struct Tableau {
    /// Rows of coefficients with the right-hand side last.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> &Rat {
        &self.rows[r][self.ncols]
    }

    /// Maximize `obj` over allowed columns with Bland's rule. Returns false
    /// when unbounded.
    fn maximize(&mut self, obj: &[Rat], allowed: &[bool]) -> bool {
        loop {
            let mut enter = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut r = obj[j].clone();
                for (i, b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        r -= &obj[*b] * &self.rows[i][j];
                    }
                }
                if r.is_positive() {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return true };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((i, _)) = leave else { return false };
            self.pivot(i, j);
        }
    }

    fn value(&self, col: usize) -> Rat {
        self.basis.iter().position(|b| *b == col).map_or_else(Rat::zero, |i| self.rhs(i).clone())
    }
}

pub fn feasible(cons: &[Constraint]) -> Feasibility {
    let mut vars: BTreeMap<Var, usize> = BTreeMap::new();
    for c in cons {
        for x in c.vars() {
            let n = vars.len();
            vars.entry(x.clone()).or_insert(n);
        }
    }
    let strict = cons.iter().any(|c| c.rel == Rel::Gt);
    let nv = vars.len();
    // columns: x+ / x- pairs, t, one slack per inequality row, one artificial per row
    let t_col = 2 * nv;
    let mut specs: Vec<(Vec<(usize, Rat)>, Rat, Rel, bool)> = Vec::new();
    for c in cons {
        let mut row: Vec<(usize, Rat)> = Vec::new();
        for (x, a) in &c.coeffs {
            let k = vars[x];
            row.push((2 * k, a.clone()));
            row.push((2 * k + 1, -a.clone()));
        }
        if c.rel == Rel::Gt {
            row.push((t_col, -Rat::one()));
        }
        let rel = if c.rel == Rel::Eq { Rel::Eq } else { Rel::Ge };
        specs.push((row, -c.constant.clone(), rel, false));
    }
    if strict {
        // t <= 1, written -t >= -1
        specs.push((vec![(t_col, -Rat::one())], -Rat::one(), Rel::Ge, false));
    }
    let m = specs.len();
    let base_cols = t_col + 1;
    let slack0 = base_cols;
    let art0 = slack0 + m;
    let ncols = art0 + m;
    let mut rows = vec![vec![Rat::zero(); ncols + 1]; m];
    let mut basis = vec![0; m];
    for (i, (row, b, rel, _)) in specs.iter().enumerate() {
        // row · y  (>= | =)  b, flipped to keep b nonnegative
        let flip = b.is_negative();
        let sign = if flip { -Rat::one() } else { Rat::one() };
        for (j, a) in row {
            rows[i][*j] += a * &sign;
        }
        rows[i][ncols] = b * &sign;
        let slack_on_ge = *rel == Rel::Ge;
        if slack_on_ge {
            // surplus for >=, slack for <= after flipping
            rows[i][slack0 + i] = if flip { Rat::one() } else { -Rat::one() };
        }
        if slack_on_ge && flip {
            basis[i] = slack0 + i;
        } else {
            rows[i][art0 + i] = Rat::one();
            basis[i] = art0 + i;
        }
    }
    let mut tab = Tableau { rows, basis, ncols };
    let mut allowed = vec![true; ncols];
    for (i, (_, _, rel, _)) in specs.iter().enumerate() {
        if *rel != Rel::Ge {
            allowed[slack0 + i] = false;
        }
    }
    if !strict {
        allowed[t_col] = false;
    }
    let mut phase1 = vec![Rat::zero(); ncols];
    for v in phase1.iter_mut().skip(art0) {
        *v = -Rat::one();
    }
    tab.maximize(&phase1, &allowed);
    let infeas: Rat = (art0..ncols).map(|j| tab.value(j)).sum();
    if infeas.is_positive() {
        return Feasibility::Unsat;
    }
    // drive remaining artificials out of the basis
    for i in 0..m {
        if tab.basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|j| allowed[*j] && !tab.rows[i][*j].is_zero()) {
                tab.pivot(i, j);
            }
        }
    }
    for a in allowed.iter_mut().skip(art0) {
        *a = false;
    }
    if strict {
        let mut obj = vec![Rat::zero(); ncols];
        obj[t_col] = Rat::one();
        tab.maximize(&obj, &allowed);
        if !tab.value(t_col).is_positive() {
            return Feasibility::Unsat;
        }
    }
    let env: Env = vars.iter().map(|(x, k)| (x.clone(), tab.value(2 * k) - tab.value(2 * k + 1))).collect();
    Feasibility::Sat(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::linear::fourier_motzkin;
    use crate::ast::rat;

    fn c(pairs: &[(&str, i64)], k: i64, rel: Rel) -> Constraint {
        Constraint::new(pairs.iter().map(|(x, a)| (Var::new(*x), rat(*a))).collect(), rat(k), rel)
    }

    #[test]
    fn agrees_with_elimination_on_small_systems() {
        let systems = vec![
            vec![c(&[("x", 1)], 0, Rel::Gt), c(&[("x", -1)], 0, Rel::Ge)],
            vec![c(&[("x", 1)], 0, Rel::Ge), c(&[("x", -1)], 0, Rel::Ge)],
            vec![
                c(&[("x", 1), ("y", 1)], -2, Rel::Ge),
                c(&[("x", 1), ("y", -1)], 0, Rel::Gt),
                c(&[("y", 1)], 0, Rel::Ge),
                c(&[("x", 1), ("y", 2)], -5, Rel::Eq),
            ],
            vec![c(&[("x", 1), ("y", 1)], 0, Rel::Gt), c(&[("x", -1)], 0, Rel::Gt), c(&[("y", -1)], 0, Rel::Ge)],
        ];
        for s in systems {
            let a = matches!(fourier_motzkin(&s), Feasibility::Sat(_));
            match feasible(&s) {
                Feasibility::Sat(env) => {
                    assert!(a);
                    assert!(s.iter().all(|k| k.holds(&env)), "{:?}", env);
                }
                Feasibility::Unsat => assert!(!a),
                Feasibility::TooLarge => unreachable!(),
            }
        }
    }
}

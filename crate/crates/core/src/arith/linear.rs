//! Linear constraints over the rationals and Fourier–Motzkin elimination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::eval::Env;
use super::poly::Poly;
use crate::ast::{Rat, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn holds(self, v: &Rat) -> bool {
        match self {
            Rel::Eq => v.is_zero(),
            Rel::Ge => !v.is_negative(),
            Rel::Gt => v.is_positive(),
        }
    }
}

/// `Σ coeffs[x]·x + constant  rel  0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub coeffs: BTreeMap<Var, Rat>,
    pub constant: Rat,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(coeffs: BTreeMap<Var, Rat>, constant: Rat, rel: Rel) -> Constraint {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Constraint { coeffs, constant, rel }
    }

    /// From a linear polynomial; `None` if `p` has a nonlinear monomial.
    pub fn from_poly(p: &Poly, rel: Rel) -> Option<Constraint> {
        let mut coeffs = BTreeMap::new();
        for (m, c) in &p.terms {
            match m.0.as_slice() {
                [] => {}
                [(x, 1)] => {
                    coeffs.insert(x.clone(), c.clone());
                }
                _ => return None,
            }
        }
        Some(Constraint::new(coeffs, p.constant_term(), rel))
    }

    pub fn value(&self, env: &Env) -> Rat {
        let mut v = self.constant.clone();
        for (x, c) in &self.coeffs {
            v += c * env.get(x).cloned().unwrap_or_else(Rat::zero);
        }
        v
    }

    pub fn holds(&self, env: &Env) -> bool {
        self.rel.holds(&self.value(env))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    /// Scale by a positive factor so the first coefficient has magnitude 1.
    fn normalized(mut self) -> Constraint {
        if let Some(c) = self.coeffs.values().next() {
            let k = c.abs().recip();
            if self.rel == Rel::Eq && c.is_negative() {
                return self.scaled(&-k);
            }
            self = self.scaled(&k);
        }
        self
    }

    fn scaled(self, k: &Rat) -> Constraint {
        Constraint {
            coeffs: self.coeffs.into_iter().map(|(x, c)| (x, c * k)).collect(),
            constant: self.constant * k,
            rel: self.rel,
        }
    }

    /// Replace `x` by `Σ e.coeffs·y + e.constant`.
    fn substitute(&self, x: &Var, e: &(BTreeMap<Var, Rat>, Rat)) -> Constraint {
        let Some(a) = self.coeffs.get(x) else { return self.clone() };
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(x);
        for (y, c) in &e.0 {
            *coeffs.entry(y.clone()).or_insert_with(Rat::zero) += a * c;
        }
        Constraint::new(coeffs, &self.constant + a * &e.1, self.rel)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(x, c)| format!("{}*{}", crate::printer::rat_str(c), x))
            .collect();
        parts.push(crate::printer::rat_str(&self.constant));
        let rel = match self.rel {
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        };
        write!(f, "{} {} 0", parts.join(" + "), rel)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Sat(Env),
    Unsat,
    /// Elimination exceeded its constraint budget.
    TooLarge,
}

pub const FM_BUDGET: usize = 4000;

/// Decide satisfiability of a conjunction of linear constraints by
/// Fourier–Motzkin elimination, producing a model when satisfiable.
pub fn fourier_motzkin(cons: &[Constraint]) -> Feasibility {
    fm(cons.to_vec(), FM_BUDGET)
}

fn fm(cons: Vec<Constraint>, budget: usize) -> Feasibility {
    let mut set: BTreeSet<Constraint> = BTreeSet::new();
    for c in cons {
        if c.coeffs.is_empty() {
            if !c.rel.holds(&c.constant) {
                return Feasibility::Unsat;
            }
            continue;
        }
        set.insert(c.normalized());
    }
    if set.len() > budget {
        return Feasibility::TooLarge;
    }
    let cons: Vec<Constraint> = set.into_iter().collect();
    if cons.is_empty() {
        return Feasibility::Sat(Env::new());
    }

    // Equalities first: solve one for its first variable.
    if let Some(eq) = cons.iter().find(|c| c.rel == Rel::Eq).cloned() {
        let (x, a) = eq.coeffs.iter().next().map(|(x, a)| (x.clone(), a.clone())).unwrap();
        let inv = -a.recip();
        let sol: BTreeMap<Var, Rat> =
            eq.coeffs.iter().filter(|(y, _)| **y != x).map(|(y, c)| (y.clone(), c * &inv)).collect();
        let def = (sol, &eq.constant * &inv);
        let rest: Vec<Constraint> =
            cons.iter().filter(|c| **c != eq).map(|c| c.substitute(&x, &def)).collect();
        return match fm(rest, budget) {
            Feasibility::Sat(mut env) => {
                let mut v = def.1.clone();
                for (y, c) in &def.0 {
                    v += c * env.entry(y.clone()).or_insert_with(Rat::zero).clone();
                }
                env.insert(x, v);
                Feasibility::Sat(env)
            }
            other => other,
        };
    }

    // Choose the variable minimizing the number of produced constraints.
    let vars: BTreeSet<&Var> = cons.iter().flat_map(|c| c.vars()).collect();
    let x = vars
        .into_iter()
        .min_by_key(|x| {
            let pos = cons.iter().filter(|c| c.coeffs.get(*x).is_some_and(|a| a.is_positive())).count();
            let neg = cons.iter().filter(|c| c.coeffs.get(*x).is_some_and(|a| a.is_negative())).count();
            pos * neg
        })
        .unwrap()
        .clone();

    // Bounds on x: x >= (or >) -rest/a for a > 0, x <= (or <) -rest/a for a < 0.
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut other = Vec::new();
    for c in &cons {
        match c.coeffs.get(&x) {
            Some(a) => {
                let inv = -a.recip();
                let rest: BTreeMap<Var, Rat> =
                    c.coeffs.iter().filter(|(y, _)| **y != x).map(|(y, k)| (y.clone(), k * &inv)).collect();
                let bound = (rest, &c.constant * &inv, c.rel == Rel::Gt);
                if a.is_positive() {
                    lower.push(bound);
                } else {
                    upper.push(bound);
                }
            }
            None => other.push(c.clone()),
        }
    }
    let mut next = other;
    for (lc, l0, ls) in &lower {
        for (uc, u0, us) in &upper {
            // u - l rel 0
            let mut coeffs = uc.clone();
            for (y, k) in lc {
                *coeffs.entry(y.clone()).or_insert_with(Rat::zero) -= k;
            }
            let rel = if *ls || *us { Rel::Gt } else { Rel::Ge };
            next.push(Constraint::new(coeffs, u0 - l0, rel));
            if next.len() > budget {
                return Feasibility::TooLarge;
            }
        }
    }
    match fm(next, budget) {
        Feasibility::Sat(mut env) => {
            let eval = |b: &(BTreeMap<Var, Rat>, Rat, bool), env: &mut Env| {
                let mut v = b.1.clone();
                for (y, k) in &b.0 {
                    v += k * env.entry(y.clone()).or_insert_with(Rat::zero).clone();
                }
                (v, b.2)
            };
            let lo = lower.iter().map(|b| eval(b, &mut env)).reduce(|a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1) {
                    b
                } else {
                    a
                }
            });
            let hi = upper.iter().map(|b| eval(b, &mut env)).reduce(|a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1) {
                    b
                } else {
                    a
                }
            });
            let v = match (lo, hi) {
                (None, None) => Rat::zero(),
                (Some((l, s)), None) => if s { l + Rat::one() } else { l },
                (None, Some((h, s))) => if s { h - Rat::one() } else { h },
                (Some((l, ls)), Some((h, hs))) => {
                    if !ls && !hs && l == h {
                        l
                    } else if !ls {
                        l
                    } else if !hs {
                        h
                    } else {
                        (l + h) / Rat::from_integer(2.into())
                    }
                }
            };
            env.insert(x, v);
            Feasibility::Sat(env)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::rat;

    fn c(pairs: &[(&str, i64)], k: i64, rel: Rel) -> Constraint {
        Constraint::new(pairs.iter().map(|(x, a)| (Var::new(*x), rat(*a))).collect(), rat(k), rel)
    }

    #[test]
    fn strict_bounds_conflict() {
        // x > 0, -x >= 0
        let cs = [c(&[("x", 1)], 0, Rel::Gt), c(&[("x", -1)], 0, Rel::Ge)];
        assert_eq!(fourier_motzkin(&cs), Feasibility::Unsat);
    }

    #[test]
    fn touching_bounds_are_satisfiable() {
        let cs = [c(&[("x", 1)], 0, Rel::Ge), c(&[("x", -1)], 0, Rel::Ge)];
        match fourier_motzkin(&cs) {
            Feasibility::Sat(env) => assert!(cs.iter().all(|k| k.holds(&env))),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn models_satisfy_every_constraint() {
        // x + y >= 2, x - y > 0, y >= 0, x + 2y = 5
        let cs = [
            c(&[("x", 1), ("y", 1)], -2, Rel::Ge),
            c(&[("x", 1), ("y", -1)], 0, Rel::Gt),
            c(&[("y", 1)], 0, Rel::Ge),
            c(&[("x", 1), ("y", 2)], -5, Rel::Eq),
        ];
        match fourier_motzkin(&cs) {
            Feasibility::Sat(env) => assert!(cs.iter().all(|k| k.holds(&env)), "{:?}", env),
            other => panic!("{:?}", other),
        }
    }
}

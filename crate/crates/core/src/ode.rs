//! Polynomial solutions of ODE systems and Lie derivatives along them.

use std::collections::{BTreeMap, BTreeSet};

use crate::arith::poly::{Mono, Poly};
use crate::arith::ratfun::normalize_poly;
use crate::ast::{Rat, Term, Var};

/// Solutions of a triangular system: each state variable as a polynomial
/// in the initial values, the constants and the duration variable.
pub type Solution = BTreeMap<Var, Poly>;

/// Right-hand sides as polynomials, if all are polynomial.
pub fn field(eqs: &[(Var, Term)]) -> Option<BTreeMap<Var, Poly>> {
    eqs.iter().map(|(x, t)| Some((x.clone(), normalize_poly(t).ok()??))).collect()
}

/// Integrate `p(r)` in `dur` from 0 to `dur`.
fn integrate(p: &Poly, dur: &Var) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let (rest, e) = m.without(dur);
        let k = Rat::from_integer((e + 1).into());
        let m2 = rest.mul(&Mono(vec![(dur.clone(), e + 1)]));
        out = &out + &Poly::mono(m2, c / k);
    }
    out
}

/// Solve `x' = f(x)` when the dependency graph among state variables is
/// acyclic (no self-dependency either), integrating layer by layer.
/// `pre` maps each state variable to the variable naming its initial value.
pub fn solve(eqs: &[(Var, Term)], pre: &BTreeMap<Var, Var>, dur: &Var) -> Option<Solution> {
    let f = field(eqs)?;
    let states: BTreeSet<&Var> = f.keys().collect();
    let mut sol: Solution = BTreeMap::new();
    let mut pending: Vec<&Var> = states.iter().copied().collect();
    while !pending.is_empty() {
        let ready = pending.iter().position(|x| {
            f[*x].vars().iter().all(|y| !states.contains(y) || (sol.contains_key(y) && y != *x))
        })?;
        let x = pending.remove(ready);
        let rhs = f[x].subst(&sol);
        let x0 = Poly::var(pre.get(x)?.clone());
        sol.insert(x.clone(), &x0 + &integrate(&rhs, dur));
    }
    Some(sol)
}

/// Check `d/ds sol = rhs ∘ sol` and `sol|s=0 = pre` exactly.
pub fn verify_solution(eqs: &[(Var, Term)], pre: &BTreeMap<Var, Var>, dur: &Var, sol: &Solution) -> bool {
    let Some(f) = field(eqs) else { return false };
    let zero: BTreeMap<Var, Poly> = [(dur.clone(), Poly::zero())].into_iter().collect();
    f.iter().all(|(x, rhs)| {
        let s = &sol[x];
        s.derivative(dur) == rhs.subst(sol) && s.subst(&zero) == Poly::var(pre[x].clone())
    })
}

/// The clock of a system: a variable with right-hand side exactly 1.
pub fn clock(eqs: &[(Var, Term)]) -> Option<Var> {
    let f = field(eqs)?;
    f.into_iter().find(|(_, p)| *p == Poly::int(1)).map(|(x, _)| x)
}

/// `a·y + b` with `a`, `b` free of `y`.
pub fn linear_in(rhs: &Term, y: &Var) -> bool {
    match normalize_poly(rhs) {
        Ok(Some(p)) => p.degree_in(y) <= 1,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn sys(eqs: &[(&str, &str)]) -> (Vec<(Var, Term)>, BTreeMap<Var, Var>) {
        let e: Vec<(Var, Term)> = eqs.iter().map(|(x, t)| (Var::new(*x), parse_term(t).unwrap())).collect();
        let pre = e.iter().map(|(x, _)| (x.clone(), Var::new(format!("{}0", x.name)))).collect();
        (e, pre)
    }

    fn p(s: &str) -> Poly {
        normalize_poly(&parse_term(s).unwrap()).unwrap().unwrap()
    }

    #[test]
    fn braking_car() {
        let (eqs, pre) = sys(&[("t", "1"), ("x", "v"), ("v", "acc")]);
        let s = Var::new("s");
        let sol = solve(&eqs, &pre, &s).unwrap();
        assert_eq!(sol[&Var::new("v")], p("v0 + acc*s"));
        assert_eq!(sol[&Var::new("x")], p("x0 + v0*s + acc*s^2/2"));
        assert!(verify_solution(&eqs, &pre, &s, &sol));
        assert_eq!(clock(&eqs), Some(Var::new("t")));
    }

    #[test]
    fn rotation_is_not_polynomial() {
        let (eqs, pre) = sys(&[("x", "y"), ("y", "-x")]);
        assert!(solve(&eqs, &pre, &Var::new("s")).is_none());
        let (eqs, pre) = sys(&[("x", "-x")]);
        assert!(solve(&eqs, &pre, &Var::new("s")).is_none());
    }

    #[test]
    fn ghost_linearity() {
        assert!(linear_in(&parse_term("y*(1/2)").unwrap(), &Var::new("y")));
        assert!(!linear_in(&parse_term("y^2").unwrap(), &Var::new("y")));
    }
}

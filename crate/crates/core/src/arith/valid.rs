//! Validity checking for arithmetic goals: propositional proving, the
//! Harrop gate, and classical refutation by substitution, linear
//! elimination and product-augmented linearization, with an external
//! solver as the last resort.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use num_traits::{One, Zero};
use thiserror::Error;

use super::eval::{self, Env};
use super::linear::{fourier_motzkin, Constraint, Feasibility, Rel};
use super::poly::{Mono, Poly};
use super::prop;
use super::ratfun::{normalize, NormError};
use super::simplex;
use super::smt;
use crate::ast::{Cmp, Formula, Rat, Term, Var};
use crate::printer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Procedure {
    Prop,
    Linear,
    SubstLinear,
    /// Linear reasoning over monomials with pairwise products of hypotheses.
    Products,
    External,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Prop => "prop",
            Procedure::Linear => "linear",
            Procedure::SubstLinear => "substitution+linear",
            Procedure::Products => "products+linear",
            Procedure::External => "external",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Valid,
    /// Exact assignment satisfying every hypothesis and falsifying the goal.
    Counterexample(Env),
    /// Shown invalid without an exact witness (external solver answered sat).
    Refuted(String),
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub procedure: Procedure,
    pub export: Option<PathBuf>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.outcome == Outcome::Valid
    }

    fn new(outcome: Outcome, procedure: Procedure) -> Verdict {
        Verdict { outcome, procedure, export: None }
    }

    /// One-line explanation for diagnostics.
    pub fn describe(&self) -> String {
        let mut s = match &self.outcome {
            Outcome::Valid => format!("valid ({})", self.procedure),
            Outcome::Counterexample(env) => format!("counterexample: {}", eval::env_string(env)),
            Outcome::Refuted(why) => format!("invalid: {}", why),
            Outcome::Unknown(why) => format!("unknown: {}", why),
        };
        if let Some(p) = &self.export {
            s.push_str(&format!("; obligation exported to {}", p.display()));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("goal is not hereditary Harrop (a disjunction or existential sits in goal position); split it with `prop` or proof terms first")]
    NotHarrop,
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Prop,
    Rcf,
    Auto,
}

#[derive(Clone, Debug)]
pub struct Backend {
    pub solver: Option<PathBuf>,
    pub export_dir: PathBuf,
    pub timeout: Duration,
}

impl Default for Backend {
    fn default() -> Backend {
        Backend {
            solver: smt::solver_from_env(),
            export_dir: std::env::temp_dir().join("kaisar-obligations"),
            timeout: Duration::from_secs(20),
        }
    }
}

const LEAF_BUDGET: usize = 2048;
const MAX_DENOMINATORS: usize = 6;
const MAX_PRODUCT_FACTORS: usize = 14;

enum Leaf {
    Refuted(Procedure),
    Model(Env),
    Unknown(String),
}

impl Backend {
    pub fn check(&self, label: &str, hyps: &[Formula], concl: &Formula, how: Strategy) -> Result<Verdict, ArithError> {
        if how != Strategy::Rcf && prop::prove(hyps, concl) {
            return Ok(Verdict::new(Outcome::Valid, Procedure::Prop));
        }
        if how == Strategy::Prop {
            return Ok(Verdict::new(
                Outcome::Unknown("not provable by propositional reasoning".into()),
                Procedure::Prop,
            ));
        }
        if !prop::sequent_is_harrop(hyps, concl) {
            return Err(ArithError::NotHarrop);
        }
        self.classical(label, hyps, concl)
    }

    /// Classical validity, without the Harrop gate. Callers are responsible
    /// for the constructive reading.
    pub fn classical(&self, label: &str, hyps: &[Formula], concl: &Formula) -> Result<Verdict, ArithError> {
        let mut fresh = 0usize;
        let mut todo: Vec<N> = hyps.iter().map(|h| nnf(h, true, &mut fresh)).collect();
        todo.push(nnf(concl, false, &mut fresh));
        let mut search = Search { leaves: 0, best: Procedure::Linear, stop: None };
        search.dnf(todo, Vec::new())?;
        match search.stop {
            None => Ok(Verdict::new(Outcome::Valid, search.best)),
            Some(Leaf::Model(mut env)) => {
                for h in hyps {
                    fill(&mut env, h);
                }
                fill(&mut env, concl);
                let hyps_hold = hyps.iter().all(|h| eval::formula(h, &env) == Some(true));
                if hyps_hold && eval::formula(concl, &env) == Some(false) {
                    return Ok(Verdict::new(Outcome::Counterexample(env), Procedure::Linear));
                }
                Ok(self.external(label, hyps, concl, "linear model does not evaluate exactly".into()))
            }
            Some(Leaf::Unknown(why)) => Ok(self.external(label, hyps, concl, why)),
            Some(Leaf::Refuted(_)) => unreachable!(),
        }
    }

    fn external(&self, label: &str, hyps: &[Formula], concl: &Formula, why: String) -> Verdict {
        let comment = format!("obligation {}\nvalid iff unsat", label);
        let script = smt::script(hyps, concl, &comment);
        let export = smt::export(&self.export_dir, label, &script).ok();
        let mut v = Verdict::new(Outcome::Unknown(why), Procedure::External);
        if let (Some(solver), Some(path)) = (&self.solver, &export) {
            v.outcome = match smt::run_solver(solver, path, self.timeout) {
                smt::SolverAnswer::Unsat => Outcome::Valid,
                smt::SolverAnswer::Sat => Outcome::Refuted("external solver found a counterexample".into()),
                smt::SolverAnswer::Unknown(why) => Outcome::Unknown(why),
            };
        }
        if !v.is_valid() {
            v.export = export;
        }
        v
    }
}

fn fill(env: &mut Env, f: &Formula) {
    for x in f.free_vars() {
        env.entry(x).or_insert_with(Rat::zero);
    }
}

/// Negation normal form over comparison literals.
#[derive(Clone, Debug)]
enum N {
    Lit(Cmp, Term, Term),
    True,
    False,
    And(Vec<N>),
    Or(Vec<N>),
}

fn fresh_var(x: &Var, fresh: &mut usize) -> Var {
    *fresh += 1;
    Var { name: format!("_{}{}", x.name, fresh), idx: x.idx }
}

/// NNF of `f` (or of its negation when `!pos`). Non-arithmetic atoms and
/// universally quantified hypotheses weaken to `true`, which is sound for
/// refutation; existential witnesses become fresh variables.
fn nnf(f: &Formula, pos: bool, fresh: &mut usize) -> N {
    match f {
        Formula::True => if pos { N::True } else { N::False },
        Formula::False => if pos { N::False } else { N::True },
        Formula::Cmp(op, a, b) => {
            let op = if pos { *op } else { op.negate() };
            if op == Cmp::Ne {
                N::Or(vec![N::Lit(Cmp::Lt, a.clone(), b.clone()), N::Lit(Cmp::Gt, a.clone(), b.clone())])
            } else {
                N::Lit(op, a.clone(), b.clone())
            }
        }
        Formula::Not(a) => nnf(a, !pos, fresh),
        Formula::And(a, b) if pos => N::And(vec![nnf(a, true, fresh), nnf(b, true, fresh)]),
        Formula::And(a, b) => N::Or(vec![nnf(a, false, fresh), nnf(b, false, fresh)]),
        Formula::Or(a, b) if pos => N::Or(vec![nnf(a, true, fresh), nnf(b, true, fresh)]),
        Formula::Or(a, b) => N::And(vec![nnf(a, false, fresh), nnf(b, false, fresh)]),
        Formula::Imply(a, b) if pos => N::Or(vec![nnf(a, false, fresh), nnf(b, true, fresh)]),
        Formula::Imply(a, b) => N::And(vec![nnf(a, true, fresh), nnf(b, false, fresh)]),
        Formula::Iff(a, b) if pos => N::And(vec![
            N::Or(vec![nnf(a, false, fresh), nnf(b, true, fresh)]),
            N::Or(vec![nnf(a, true, fresh), nnf(b, false, fresh)]),
        ]),
        Formula::Iff(a, b) => N::Or(vec![
            N::And(vec![nnf(a, true, fresh), nnf(b, false, fresh)]),
            N::And(vec![nnf(a, false, fresh), nnf(b, true, fresh)]),
        ]),
        Formula::Exists(x, body) if pos => skolem(x, body, true, fresh),
        Formula::Forall(x, body) if !pos => skolem(x, body, false, fresh),
        _ => N::True,
    }
}

fn skolem(x: &Var, body: &Formula, pos: bool, fresh: &mut usize) -> N {
    let y = fresh_var(x, fresh);
    match body.subst(&crate::vars::subst1(x.clone(), Term::Var(y))) {
        Ok(b) => nnf(&b, pos, fresh),
        Err(_) => N::True,
    }
}

struct Search {
    leaves: usize,
    best: Procedure,
    stop: Option<Leaf>,
}

impl Search {
    fn dnf(&mut self, mut todo: Vec<N>, mut lits: Vec<(Cmp, Term, Term)>) -> Result<(), ArithError> {
        if self.stop.is_some() {
            return Ok(());
        }
        while let Some(n) = todo.pop() {
            match n {
                N::True => {}
                N::False => return Ok(()),
                N::Lit(op, a, b) => lits.push((op, a, b)),
                N::And(xs) => todo.extend(xs),
                N::Or(xs) => {
                    for x in xs {
                        let mut t = todo.clone();
                        t.push(x);
                        self.dnf(t, lits.clone())?;
                        if self.stop.is_some() {
                            return Ok(());
                        }
                    }
                    return Ok(());
                }
            }
        }
        self.leaves += 1;
        if self.leaves > LEAF_BUDGET {
            self.stop = Some(Leaf::Unknown("case split budget exhausted".into()));
            return Ok(());
        }
        match leaf(lits)? {
            Leaf::Refuted(p) => self.best = self.best.max(p),
            other => self.stop = Some(other),
        }
        Ok(())
    }
}

fn find_minmax(t: &Term) -> Option<Term> {
    match t {
        Term::Min(..) | Term::Max(..) => {
            let (Term::Min(a, b) | Term::Max(a, b)) = t else { unreachable!() };
            find_minmax(a).or_else(|| find_minmax(b)).or_else(|| Some(t.clone()))
        }
        Term::Neg(a) | Term::Pow(a, _) | Term::At(a, _) => find_minmax(a),
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
            find_minmax(a).or_else(|| find_minmax(b))
        }
        Term::App(_, args) => args.iter().find_map(find_minmax),
        Term::Num(_) | Term::Var(_) => None,
    }
}

fn replace(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    let r = |x: &Term| Box::new(replace(x, from, to));
    match t {
        Term::Num(_) | Term::Var(_) => t.clone(),
        Term::Neg(a) => Term::Neg(r(a)),
        Term::Add(a, b) => Term::Add(r(a), r(b)),
        Term::Sub(a, b) => Term::Sub(r(a), r(b)),
        Term::Mul(a, b) => Term::Mul(r(a), r(b)),
        Term::Div(a, b) => Term::Div(r(a), r(b)),
        Term::Pow(a, e) => Term::Pow(r(a), e.clone()),
        Term::Min(a, b) => Term::Min(r(a), r(b)),
        Term::Max(a, b) => Term::Max(r(a), r(b)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| replace(a, from, to)).collect()),
        Term::At(a, l) => Term::At(r(a), l.clone()),
    }
}

/// Decide one conjunction of comparisons.
fn leaf(lits: Vec<(Cmp, Term, Term)>) -> Result<Leaf, ArithError> {
    // min/max: split on the first occurrence
    if let Some(m) = lits.iter().find_map(|(_, a, b)| find_minmax(a).or_else(|| find_minmax(b))) {
        let (Term::Min(a, b) | Term::Max(a, b)) = &m else { unreachable!() };
        let is_min = matches!(m, Term::Min(..));
        let mut worst = Procedure::Linear;
        for first in [true, false] {
            let (chosen, cond) = if first {
                ((**a).clone(), if is_min { Cmp::Le } else { Cmp::Ge })
            } else {
                ((**b).clone(), if is_min { Cmp::Gt } else { Cmp::Lt })
            };
            let mut branch: Vec<(Cmp, Term, Term)> =
                lits.iter().map(|(op, x, y)| (*op, replace(x, &m, &chosen), replace(y, &m, &chosen))).collect();
            branch.push((cond, (**a).clone(), (**b).clone()));
            match leaf(branch)? {
                Leaf::Refuted(p) => worst = worst.max(p),
                other => return Ok(other),
            }
        }
        return Ok(Leaf::Refuted(worst));
    }

    // normalize to numerator/denominator form
    let mut atoms: Vec<(Poly, Poly, Rel)> = Vec::new();
    for (op, a, b) in &lits {
        let (l, r, rel) = match op {
            Cmp::Eq => (a, b, Rel::Eq),
            Cmp::Ge => (a, b, Rel::Ge),
            Cmp::Gt => (a, b, Rel::Gt),
            Cmp::Le => (b, a, Rel::Ge),
            Cmp::Lt => (b, a, Rel::Gt),
            Cmp::Ne => unreachable!("disequalities are split in negation normal form"),
        };
        let rf = match normalize(&Term::Sub(Box::new(l.clone()), Box::new(r.clone()))) {
            Ok(rf) => rf,
            Err(NormError::DivisionByZero(_)) => return Ok(Leaf::Refuted(Procedure::Linear)),
            Err(e @ NormError::RationalExponent(_)) => return Err(e.into()),
            Err(e) => return Ok(Leaf::Unknown(e.to_string())),
        };
        atoms.push((rf.num, rf.den, rel));
    }
    let mut dens: Vec<Poly> = Vec::new();
    for (_, d, _) in &atoms {
        if d.as_constant().is_none() && !dens.contains(d) {
            dens.push(d.clone());
        }
    }
    if dens.len() > MAX_DENOMINATORS {
        return Ok(Leaf::Unknown("too many distinct denominators".into()));
    }
    // each denominator is nonzero; branch on its sign
    let mut worst = Procedure::Linear;
    for signs in 0..(1u32 << dens.len()) {
        let sign_of = |d: &Poly| -> bool {
            let k = dens.iter().position(|e| e == d).unwrap();
            signs & (1 << k) == 0
        };
        let mut polys: Vec<(Poly, Rel)> = Vec::new();
        for (k, d) in dens.iter().enumerate() {
            let positive = signs & (1 << k) == 0;
            polys.push((if positive { d.clone() } else { -d }, Rel::Gt));
        }
        for (n, d, rel) in &atoms {
            let flip = d.as_constant().is_none() && !sign_of(d);
            polys.push((if flip && *rel != Rel::Eq { -n } else { n.clone() }, *rel));
        }
        match decide(polys) {
            Leaf::Refuted(p) => worst = worst.max(p),
            other => return Ok(other),
        }
    }
    Ok(Leaf::Refuted(worst))
}

/// Solve `p = 0` for a variable with constant coefficient.
fn solvable(p: &Poly) -> Option<(Var, Poly)> {
    for x in p.vars() {
        if p.degree_in(&x) != 1 {
            continue;
        }
        let cs = p.coeffs_in(&x);
        if let Some(c) = cs[1].as_constant() {
            if !c.is_zero() {
                return Some((x, cs[0].scale(&-c.recip())));
            }
        }
    }
    None
}

fn decide(mut atoms: Vec<(Poly, Rel)>) -> Leaf {
    let mut subs: Vec<(Var, Poly)> = Vec::new();
    loop {
        let mut progressed = false;
        // constant atoms
        let mut kept = Vec::new();
        for (p, rel) in atoms {
            match p.as_constant() {
                Some(c) if !rel.holds(&c) => {
                    let proc = if subs.is_empty() { Procedure::Linear } else { Procedure::SubstLinear };
                    return Leaf::Refuted(proc);
                }
                Some(_) => {}
                None => kept.push((p, rel)),
            }
        }
        atoms = kept;
        let pick = atoms.iter().position(|(p, rel)| *rel == Rel::Eq && !p.is_linear() && solvable(p).is_some());
        let pick = pick.or_else(|| atoms.iter().position(|(p, rel)| *rel == Rel::Eq && solvable(p).is_some()));
        if let Some(k) = pick {
            let (p, _) = atoms.remove(k);
            let (x, sol) = solvable(&p).unwrap();
            let s: BTreeMap<Var, Poly> = [(x.clone(), sol.clone())].into_iter().collect();
            atoms = atoms.into_iter().map(|(q, r)| (q.subst(&s), r)).collect();
            for (_, e) in subs.iter_mut() {
                *e = e.subst(&s);
            }
            subs.push((x, sol));
            progressed = true;
        }
        if !progressed {
            break;
        }
    }
    let proc = if subs.is_empty() { Procedure::Linear } else { Procedure::SubstLinear };
    if atoms.iter().all(|(p, _)| p.is_linear()) {
        let cons: Vec<Constraint> = atoms.iter().map(|(p, r)| Constraint::from_poly(p, *r).unwrap()).collect();
        let feas = match fourier_motzkin(&cons) {
            Feasibility::TooLarge => simplex::feasible(&cons),
            f => f,
        };
        return match feas {
            Feasibility::Unsat => Leaf::Refuted(proc),
            Feasibility::Sat(mut env) => {
                for (x, e) in subs.iter().rev() {
                    let v = e.eval(&|y| Some(env.get(y).cloned().unwrap_or_else(Rat::zero)));
                    env.insert(x.clone(), v.unwrap_or_else(Rat::zero));
                }
                Leaf::Model(env)
            }
            Feasibility::TooLarge => Leaf::Unknown("linear system too large".into()),
        };
    }
    if products_refute(&atoms) {
        return Leaf::Refuted(Procedure::Products);
    }
    let residue: Vec<String> = atoms
        .iter()
        .map(|(p, r)| {
            let rel = match r {
                Rel::Eq => "=",
                Rel::Ge => ">=",
                Rel::Gt => ">",
            };
            format!("{} {} 0", printer::term(&p.to_term()), rel)
        })
        .collect();
    Leaf::Unknown(format!("nonlinear residue: {}", residue.join(", ")))
}

/// Linearize over monomials after adding pairwise products of the
/// inequalities, products of equations with variables, and squares.
/// Tried with growing product degree: low-degree certificates are common
/// and their linear programs much smaller.
fn products_refute(atoms: &[(Poly, Rel)]) -> bool {
    let mut uniq: Vec<(Poly, Rel)> = Vec::new();
    for a in atoms {
        if !uniq.contains(a) {
            uniq.push(a.clone());
        }
    }
    let top = uniq.iter().map(|(p, _)| p.degree()).max().unwrap_or(0) * 2;
    let mut stages = vec![0, 2, 3];
    stages.retain(|d| *d < top);
    stages.push(top);
    stages.into_iter().any(|d| products_refute_upto(&uniq, d))
}

fn products_refute_upto(atoms: &[(Poly, Rel)], max_degree: u32) -> bool {
    let mut all: Vec<(Poly, Rel)> = atoms.to_vec();
    let ineqs: Vec<&(Poly, Rel)> = atoms.iter().filter(|(_, r)| *r != Rel::Eq).take(MAX_PRODUCT_FACTORS).collect();
    let fits = |p: &Poly| p.degree() <= max_degree;
    for i in 0..ineqs.len() {
        for j in i..ineqs.len() {
            if ineqs[i].0.degree() + ineqs[j].0.degree() > max_degree {
                continue;
            }
            let rel = if ineqs[i].1 == Rel::Gt && ineqs[j].1 == Rel::Gt { Rel::Gt } else { Rel::Ge };
            all.push((&ineqs[i].0 * &ineqs[j].0, rel));
        }
    }
    let vars: BTreeSet<Var> = atoms.iter().flat_map(|(p, _)| p.vars()).collect();
    for (p, r) in atoms {
        if *r == Rel::Eq {
            for x in vars.iter().take(12) {
                all.push((&p.clone() * &Poly::var(x.clone()), Rel::Eq));
            }
            for (q, _) in &ineqs {
                all.push((&p.clone() * q, Rel::Eq));
            }
            all.retain(|(p, _)| fits(p));
        }
    }
    let vs: Vec<&Var> = vars.iter().take(if max_degree >= 2 { 8 } else { 0 }).collect();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let (x, y) = (Poly::var(vs[i].clone()), Poly::var(vs[j].clone()));
            all.push(((&x - &y).pow(2), Rel::Ge));
            all.push(((&x + &y).pow(2), Rel::Ge));
        }
    }
    // p >= 0 times an even factor of some monomial, e.g. -x >= 0 times y^2
    let mut even: BTreeSet<Mono> = BTreeSet::new();
    for (p, _) in atoms {
        for m in p.terms.keys() {
            let e = Mono(m.0.iter().filter(|(_, k)| *k >= 2).map(|(x, k)| (x.clone(), k / 2 * 2)).collect());
            if !e.is_one() {
                even.insert(e);
            }
        }
    }
    for m in even.iter().take(6) {
        for (q, _) in &ineqs {
            let p = q.mul_mono(m, &Rat::one());
            if fits(&p) {
                all.push((p, Rel::Ge));
            }
        }
    }
    let mut squares: BTreeSet<Mono> = BTreeSet::new();
    for (p, _) in &all {
        for m in p.terms.keys() {
            if !m.is_one() && m.is_square() {
                squares.insert(m.clone());
            }
        }
    }
    for m in squares {
        all.push((Poly::mono(m, Rat::one()), Rel::Ge));
    }
    let mut names: BTreeMap<Mono, Var> = BTreeMap::new();
    let cons: Vec<Constraint> = all
        .iter()
        .map(|(p, rel)| {
            let mut coeffs = BTreeMap::new();
            for (m, c) in &p.terms {
                if m.is_one() {
                    continue;
                }
                let v = match m.0.as_slice() {
                    [(x, 1)] => x.clone(),
                    _ => {
                        let n = names.len();
                        names.entry(m.clone()).or_insert_with(|| Var::new(format!("_mono{}", n))).clone()
                    }
                };
                coeffs.insert(v, c.clone());
            }
            Constraint::new(coeffs, p.constant_term(), *rel)
        })
        .collect();
    simplex::feasible(&drop_free(cons)) == Feasibility::Unsat
}

/// Remove constraints that mention a variable occurring nowhere else: that
/// variable alone can satisfy them, so feasibility is unchanged.
fn drop_free(mut cons: Vec<Constraint>) -> Vec<Constraint> {
    loop {
        let mut count: BTreeMap<&Var, usize> = BTreeMap::new();
        for c in &cons {
            for x in c.coeffs.keys() {
                *count.entry(x).or_default() += 1;
            }
        }
        let free: BTreeSet<Var> = count.into_iter().filter(|(_, n)| *n == 1).map(|(x, _)| x.clone()).collect();
        if free.is_empty() {
            return cons;
        }
        cons.retain(|c| !c.coeffs.keys().any(|x| free.contains(x)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn backend() -> Backend {
        Backend { solver: None, export_dir: std::env::temp_dir().join("kaisar-test-obligations"), timeout: Duration::from_secs(5) }
    }

    fn check(hyps: &[&str], concl: &str) -> Verdict {
        let hs: Vec<Formula> = hyps.iter().map(|h| f(h)).collect();
        backend().check("t", &hs, &f(concl), Strategy::Auto).unwrap()
    }

    #[test]
    fn successor_is_larger() {
        assert!(check(&[], "x + 1 > x").is_valid());
    }

    #[test]
    fn ghost_invariant_gives_positivity() {
        assert!(check(&["x*y^2 = 1"], "x > 0").is_valid());
    }

    #[test]
    fn inductive_step_with_constant() {
        assert!(check(&["c = 3", "x >= 0"], "x + c >= 0").is_valid());
    }

    #[test]
    fn counterexamples_are_exact() {
        let v = check(&["x >= 0"], "x > 0");
        let Outcome::Counterexample(env) = &v.outcome else { panic!("{:?}", v) };
        assert_eq!(eval::formula(&f("x > 0"), env), Some(false));
    }

    #[test]
    fn min_and_division_split() {
        assert!(check(&["B > 0", "v >= 0"], "min(T, v/B) <= v/B").is_valid());
        assert!(check(&["B > 0"], "v - B*(v/B) = 0").is_valid());
    }

    #[test]
    fn disjunctive_hypotheses() {
        assert!(check(&["x = 0 | x = 1"], "x >= 0").is_valid());
    }

    #[test]
    fn nonlinear_by_products() {
        assert!(check(&["x > 0", "y > 0"], "x*y > 0").is_valid());
        assert!(check(&[], "x^2 + y^2 >= 2*x*y").is_valid());
    }

    #[test]
    fn harrop_gate() {
        let b = backend();
        assert_eq!(b.check("t", &[], &f("x >= 0 | x < 1"), Strategy::Rcf), Err(ArithError::NotHarrop));
    }
}

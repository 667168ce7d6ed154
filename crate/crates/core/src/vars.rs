//! Free-variable analysis and simultaneous substitution.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::ast::*;

pub type VarSet = BTreeSet<Var>;
pub type Subst = BTreeMap<Var, Term>;

/// Raised when a substitution would capture a bound variable. Elaboration
/// keeps bound names fresh, so this indicates an internal bug.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("substitution captures bound variable {0}")]
pub struct Capture(pub Var);

impl Term {
    pub fn num(n: i64) -> Term {
        Term::Num(rat(n))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Term::Num(r) if r.is_zero())
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Term::Num(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Neg(a) | Term::Pow(a, _) => a.collect_vars(out),
            Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Mul(a, b)
            | Term::Div(a, b)
            | Term::Min(a, b)
            | Term::Max(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::At(e, loc) => {
                e.collect_vars(out);
                loc.args.iter().for_each(|a| a.collect_vars(out));
            }
        }
    }

    pub fn subst(&self, s: &Subst) -> Term {
        if s.is_empty() {
            return self.clone();
        }
        self.map_vars(&mut |v| s.get(v).cloned())
    }

    /// Rebuild the term, replacing each variable for which `f` returns a term.
    pub fn map_vars(&self, f: &mut dyn FnMut(&Var) -> Option<Term>) -> Term {
        let bx = |t: Term| Box::new(t);
        match self {
            Term::Num(_) => self.clone(),
            Term::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Term::Neg(a) => Term::Neg(bx(a.map_vars(f))),
            Term::Pow(a, e) => Term::Pow(bx(a.map_vars(f)), e.clone()),
            Term::Add(a, b) => Term::Add(bx(a.map_vars(f)), bx(b.map_vars(f))),
            Term::Sub(a, b) => Term::Sub(bx(a.map_vars(f)), bx(b.map_vars(f))),
            Term::Mul(a, b) => Term::Mul(bx(a.map_vars(f)), bx(b.map_vars(f))),
            Term::Div(a, b) => Term::Div(bx(a.map_vars(f)), bx(b.map_vars(f))),
            Term::Min(a, b) => Term::Min(bx(a.map_vars(f)), bx(b.map_vars(f))),
            Term::Max(a, b) => Term::Max(bx(a.map_vars(f)), bx(b.map_vars(f))),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
            // variables inside a located expression live at the label, not here
            Term::At(e, loc) => Term::At(
                e.clone(),
                Located { label: loc.label.clone(), args: loc.args.iter().map(|a| a.map_vars(f)).collect() },
            ),
        }
    }

    pub fn contains_at(&self) -> bool {
        match self {
            Term::At(..) => true,
            Term::Num(_) | Term::Var(_) => false,
            Term::Neg(a) | Term::Pow(a, _) => a.contains_at(),
            Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Mul(a, b)
            | Term::Div(a, b)
            | Term::Min(a, b)
            | Term::Max(a, b) => a.contains_at() || b.contains_at(),
            Term::App(_, args) => args.iter().any(Term::contains_at),
        }
    }
}

impl Formula {
    pub fn cmp(op: Cmp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (a, Formula::True) => a,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imply(a: Formula, b: Formula) -> Formula {
        Formula::Imply(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().fold(Formula::True, Formula::and)
    }

    /// Right-nested disjunction; `False` for an empty list.
    pub fn disj(fs: Vec<Formula>) -> Formula {
        let mut it = fs.into_iter().rev();
        match it.next() {
            None => Formula::False,
            Some(last) => it.fold(last, |acc, f| Formula::or(f, acc)),
        }
    }

    /// Flatten top-level conjunctions.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            Formula::True => vec![],
            f => vec![f],
        }
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Not(a) => a.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let mut inner = a.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
            Formula::Box(g, p) | Formula::Diamond(g, p) => {
                g.collect_vars(out);
                let bound = g.must_bound();
                out.extend(p.free_vars().into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Pred(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Formula::At(e, loc) => {
                e.collect_vars(out);
                loc.args.iter().for_each(|a| a.collect_vars(out));
            }
        }
    }

    /// Simultaneous capture-checked substitution.
    pub fn subst(&self, s: &Subst) -> Result<Formula, Capture> {
        if s.is_empty() {
            return Ok(self.clone());
        }
        let bx = |f: Formula| Box::new(f);
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, a.subst(s), b.subst(s)),
            Formula::Not(a) => Formula::Not(bx(a.subst(s)?)),
            Formula::And(a, b) => Formula::And(bx(a.subst(s)?), bx(b.subst(s)?)),
            Formula::Or(a, b) => Formula::Or(bx(a.subst(s)?), bx(b.subst(s)?)),
            Formula::Imply(a, b) => Formula::Imply(bx(a.subst(s)?), bx(b.subst(s)?)),
            Formula::Iff(a, b) => Formula::Iff(bx(a.subst(s)?), bx(b.subst(s)?)),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let mut inner = s.clone();
                inner.remove(x);
                for (k, t) in &inner {
                    if t.free_vars().contains(x) && a.free_vars().contains(k) {
                        return Err(Capture(x.clone()));
                    }
                }
                let body = bx(a.subst(&inner)?);
                if matches!(self, Formula::Forall(..)) {
                    Formula::Forall(x.clone(), body)
                } else {
                    Formula::Exists(x.clone(), body)
                }
            }
            Formula::Box(g, p) | Formula::Diamond(g, p) => {
                let bound = g.bound_vars();
                if let Some(v) = s.keys().find(|v| bound.contains(*v)) {
                    return Err(Capture(v.clone()));
                }
                let g2 = bx_game(g.subst_terms(s));
                let p2 = bx(p.subst(s)?);
                if matches!(self, Formula::Box(..)) {
                    Formula::Box(g2, p2)
                } else {
                    Formula::Diamond(g2, p2)
                }
            }
            Formula::Pred(n, args) => Formula::Pred(n.clone(), args.iter().map(|a| a.subst(s)).collect()),
            Formula::At(e, loc) => Formula::At(
                e.clone(),
                Located { label: loc.label.clone(), args: loc.args.iter().map(|a| a.subst(s)).collect() },
            ),
        })
    }

    /// Apply `f` to every term position (comparison operands and predicate
    /// arguments), leaving binders alone.
    pub fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Term) -> Formula {
        let bx = |x: Formula| Box::new(x);
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, f(a), f(b)),
            Formula::Not(a) => Formula::Not(bx(a.map_terms(f))),
            Formula::And(a, b) => Formula::And(bx(a.map_terms(f)), bx(b.map_terms(f))),
            Formula::Or(a, b) => Formula::Or(bx(a.map_terms(f)), bx(b.map_terms(f))),
            Formula::Imply(a, b) => Formula::Imply(bx(a.map_terms(f)), bx(b.map_terms(f))),
            Formula::Iff(a, b) => Formula::Iff(bx(a.map_terms(f)), bx(b.map_terms(f))),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), bx(a.map_terms(f))),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), bx(a.map_terms(f))),
            Formula::Box(g, p) => Formula::Box(g.clone(), bx(p.map_terms(f))),
            Formula::Diamond(g, p) => Formula::Diamond(g.clone(), bx(p.map_terms(f))),
            Formula::Pred(n, args) => Formula::Pred(n.clone(), args.iter().map(|a| f(a)).collect()),
            Formula::At(e, loc) => Formula::At(
                e.clone(),
                Located { label: loc.label.clone(), args: loc.args.iter().map(|a| f(a)).collect() },
            ),
        }
    }

    pub fn has_modality(&self) -> bool {
        match self {
            Formula::Box(..) | Formula::Diamond(..) => true,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) | Formula::At(a, _) => a.has_modality(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Iff(a, b) => {
                a.has_modality() || b.has_modality()
            }
            _ => false,
        }
    }
}

fn bx_game(g: Game) -> Box<Game> {
    Box::new(g)
}

impl Game {
    /// Variables possibly written by the game.
    pub fn bound_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut VarSet) {
        match self {
            Game::Assign(x, _) | Game::Random(x) => {
                out.insert(x.clone());
            }
            Game::Ode(eqs, _) => out.extend(eqs.iter().map(|(x, _)| x.clone())),
            Game::Test(_) | Game::Call(_) => {}
            Game::Seq(gs) => gs.iter().for_each(|g| g.collect_bound(out)),
            Game::Choice(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            Game::Repeat(a) | Game::Dual(a) => a.collect_bound(out),
        }
    }

    /// Variables written on every run of the game.
    pub fn must_bound(&self) -> VarSet {
        match self {
            Game::Assign(x, _) | Game::Random(x) => [x.clone()].into_iter().collect(),
            Game::Ode(eqs, _) => eqs.iter().map(|(x, _)| x.clone()).collect(),
            Game::Test(_) | Game::Call(_) | Game::Repeat(_) => VarSet::new(),
            Game::Seq(gs) => gs.iter().flat_map(|g| g.must_bound()).collect(),
            Game::Choice(a, b) => a.must_bound().intersection(&b.must_bound()).cloned().collect(),
            Game::Dual(a) => a.must_bound(),
        }
    }

    /// Free variables: read before possibly being written.
    pub fn collect_vars(&self, out: &mut VarSet) {
        self.free_after(&VarSet::new(), out);
    }

    fn free_after(&self, written: &VarSet, out: &mut VarSet) -> VarSet {
        let add = |vs: VarSet, out: &mut VarSet| out.extend(vs.into_iter().filter(|v| !written.contains(v)));
        match self {
            Game::Assign(x, t) => {
                add(t.free_vars(), out);
                let mut w = written.clone();
                w.insert(x.clone());
                w
            }
            Game::Random(x) => {
                let mut w = written.clone();
                w.insert(x.clone());
                w
            }
            Game::Ode(eqs, dom) => {
                let mut vs = dom.free_vars();
                for (x, t) in eqs {
                    vs.insert(x.clone());
                    vs.extend(t.free_vars());
                }
                add(vs, out);
                let mut w = written.clone();
                w.extend(eqs.iter().map(|(x, _)| x.clone()));
                w
            }
            Game::Test(f) => {
                add(f.free_vars(), out);
                written.clone()
            }
            Game::Call(_) => written.clone(),
            Game::Seq(gs) => {
                let mut w = written.clone();
                for g in gs {
                    w = g.free_after(&w, out);
                }
                w
            }
            Game::Choice(a, b) => {
                let wa = a.free_after(written, out);
                let wb = b.free_after(written, out);
                wa.intersection(&wb).cloned().collect()
            }
            Game::Repeat(a) => {
                a.free_after(written, out);
                written.clone()
            }
            Game::Dual(a) => a.free_after(written, out),
        }
    }

    pub fn subst_terms(&self, s: &Subst) -> Game {
        match self {
            Game::Assign(x, t) => Game::Assign(x.clone(), t.subst(s)),
            Game::Random(_) | Game::Call(_) => self.clone(),
            Game::Ode(eqs, dom) => Game::Ode(
                eqs.iter().map(|(x, t)| (x.clone(), t.subst(s))).collect(),
                dom.subst(s).expect("capture checked by caller"),
            ),
            Game::Test(f) => Game::Test(f.subst(s).expect("capture checked by caller")),
            Game::Seq(gs) => Game::Seq(gs.iter().map(|g| g.subst_terms(s)).collect()),
            Game::Choice(a, b) => Game::Choice(Box::new(a.subst_terms(s)), Box::new(b.subst_terms(s))),
            Game::Repeat(a) => Game::Repeat(Box::new(a.subst_terms(s))),
            Game::Dual(a) => Game::Dual(Box::new(a.subst_terms(s))),
        }
    }
}

/// Single-variable substitution map.
pub fn subst1(x: Var, t: Term) -> Subst {
    let mut s = Subst::new();
    s.insert(x, t);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn term_free_vars() {
        let t = Term::Add(Box::new(Term::var("x")), Box::new(Term::Mul(Box::new(Term::var("y")), Box::new(Term::var("y")))));
        assert_eq!(t.free_vars(), [v("x"), v("y")].into_iter().collect());
    }

    #[test]
    fn box_binds_assigned_variable() {
        let g = Game::Assign(v("x"), Term::num(2));
        let f = Formula::Box(Box::new(g), Box::new(Formula::cmp(Cmp::Ge, Term::var("x"), Term::var("y"))));
        assert_eq!(f.free_vars(), [v("y")].into_iter().collect());
    }

    #[test]
    fn empty_substitution_is_identity() {
        let t = Term::var("x");
        assert_eq!(t.subst(&Subst::new()), t);
    }

    #[test]
    fn quantifier_capture_is_reported() {
        let f = Formula::Forall(v("y"), Box::new(Formula::cmp(Cmp::Ge, Term::var("x"), Term::var("y"))));
        let s = subst1(v("x"), Term::var("y"));
        assert_eq!(f.subst(&s), Err(Capture(v("y"))));
    }
}

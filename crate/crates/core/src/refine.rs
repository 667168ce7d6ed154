//! Refinement of a reified strategy game against a user-supplied game, and
//! the `proves` command built on it.

use std::fmt;

use crate::arith::ratfun::normalize_poly;
use crate::arith::valid::{Backend, Strategy};
use crate::ast::*;
use crate::elab::Elaborated;
use crate::printer;
use crate::reify::{seq, Conclusion};
use crate::span::{Diagnostic, Span};
use crate::vars::VarSet;

/// Rewrites (test drops, distributivity, branch picks) allowed per check.
pub const REWRITE_BUDGET: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Match(&'static str),
    Distribute,
    /// A strategy-side Angelic test with no counterpart in the game.
    DropAngelTest(String),
    /// A game-side Demonic test the strategy does not repeat.
    DropDemonTest(String),
    AssignRefinesRandom(String),
    /// The strategy's test implies (Demon) or is implied by (Angel) the game's.
    Strengthen(String, String),
    /// The strategy plays one branch of an Angelic choice in the game.
    PickBranch(usize),
    /// A game step moved ahead of independent atomic steps.
    Reorder(String),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Match(k) => write!(f, "match {}", k),
            Step::Distribute => write!(f, "distribute choice over sequence"),
            Step::DropAngelTest(t) => write!(f, "drop strategy assertion ?{}", t),
            Step::DropDemonTest(t) => write!(f, "drop game assumption ?{}", t),
            Step::AssignRefinesRandom(x) => write!(f, "{} := f plays {} := *", x, x),
            Step::Strengthen(s, g) => write!(f, "test {} refines {}", s, g),
            Step::PickBranch(i) => write!(f, "pick branch {} of the game's choice", i + 1),
            Step::Reorder(g) => write!(f, "move {} ahead of independent steps", g),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    /// The strategy and game nodes where refinement got stuck.
    pub strategy: String,
    pub game: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub failure: Option<Failure>,
}

impl Trace {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Game in polarity normal form: duals pushed to the leaves, sequences
/// flattened, `?true` removed. `angel` marks who resolves the node.
#[derive(Clone, Debug, PartialEq)]
enum N {
    Assign(Var, Term),
    Random(Var, bool),
    Test(Formula, bool),
    Ode(Vec<(Var, Term)>, Formula, bool),
    Choice(Vec<N>, Vec<N>, bool),
    Repeat(Vec<N>, bool),
    Call(String),
}

fn norm(g: &Game, angel: bool, out: &mut Vec<N>) {
    match g {
        Game::Assign(x, t) => out.push(N::Assign(x.clone(), t.clone())),
        Game::Random(x) => out.push(N::Random(x.clone(), angel)),
        Game::Test(Formula::True) => {}
        Game::Test(f) => out.push(N::Test(f.clone(), angel)),
        Game::Ode(eqs, dom) => out.push(N::Ode(eqs.clone(), dom.clone(), angel)),
        Game::Seq(gs) => gs.iter().for_each(|g| norm(g, angel, out)),
        Game::Choice(a, b) => out.push(N::Choice(normed(a, angel), normed(b, angel), angel)),
        Game::Repeat(a) => out.push(N::Repeat(normed(a, angel), angel)),
        Game::Dual(a) => norm(a, !angel, out),
        Game::Call(n) => out.push(N::Call(n.clone())),
    }
}

fn normed(g: &Game, angel: bool) -> Vec<N> {
    let mut out = Vec::new();
    norm(g, angel, &mut out);
    out
}

fn who(angel: bool) -> &'static str {
    if angel {
        "Angelic"
    } else {
        "Demonic"
    }
}

fn show(ns: &[N]) -> String {
    match ns.first() {
        None => "end of game".into(),
        Some(n) => show_node(n),
    }
}

fn show_node(n: &N) -> String {
    match n {
        N::Assign(x, t) => format!("{} := {}", x, printer::term(t)),
        N::Random(x, a) => format!("{} {} := *", who(*a), x),
        N::Test(f, a) => format!("{} test ?{}", who(*a), printer::formula(f)),
        N::Ode(eqs, _, a) => {
            let es: Vec<String> = eqs.iter().map(|(x, t)| format!("{}' = {}", x, printer::term(t))).collect();
            format!("{} ODE {{{}}}", who(*a), es.join(", "))
        }
        N::Choice(_, _, a) => format!("{} choice", who(*a)),
        N::Repeat(_, a) => format!("{} loop", who(*a)),
        N::Call(n) => format!("{};", n),
    }
}

/// Variables an atomic node writes and reads; `None` for compound nodes.
fn effects(n: &N) -> Option<(Option<&Var>, VarSet)> {
    match n {
        N::Assign(x, t) => Some((Some(x), t.free_vars())),
        N::Random(x, _) => Some((Some(x), VarSet::new())),
        N::Test(f, _) => Some((None, f.free_vars())),
        _ => None,
    }
}

/// `a; b` equals `b; a`. Random assignments by different players never
/// commute, since that changes what one of them knows when choosing.
fn commute(a: &N, b: &N) -> bool {
    if let (N::Random(_, p), N::Random(_, q)) = (a, b) {
        if p != q {
            return false;
        }
    }
    let (Some((wa, ra)), Some((wb, rb))) = (effects(a), effects(b)) else { return false };
    let clash = |w: Option<&Var>, r: &VarSet, other: Option<&Var>| w.is_some_and(|x| r.contains(x) || Some(x) == other);
    !clash(wa, &rb, wb) && !clash(wb, &ra, wa)
}

fn same_term(a: &Term, b: &Term) -> bool {
    a == b
        || matches!(
            normalize_poly(&Term::Sub(Box::new(a.clone()), Box::new(b.clone()))),
            Ok(Some(p)) if p.is_zero()
        )
}

struct Refiner<'b> {
    backend: &'b Backend,
    budget: usize,
    steps: Vec<Step>,
    /// Deepest failure seen, reported when every alternative fails.
    failure: Option<Failure>,
}

impl<'b> Refiner<'b> {
    fn fail(&mut self, s: &[N], g: &[N], reason: impl Into<String>) -> bool {
        if self.failure.is_none() {
            self.failure = Some(Failure { strategy: show(s), game: show(g), reason: reason.into() });
        }
        false
    }

    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn implies(&self, p: &Formula, q: &Formula) -> bool {
        p == q
            || *q == Formula::True
            || self
                .backend
                .check("refinement", &p.conjuncts().into_iter().cloned().collect::<Vec<_>>(), q, Strategy::Auto)
                .map(|v| v.is_valid())
                .unwrap_or(false)
    }

    /// Try `f`; on failure forget its steps.
    fn attempt(&mut self, f: impl FnOnce(&mut Self) -> bool) -> bool {
        let mark = self.steps.len();
        if f(self) {
            return true;
        }
        self.steps.truncate(mark);
        false
    }

    fn seq(&mut self, s: &[N], g: &[N]) -> bool {
        if s.is_empty() && g.is_empty() {
            return true;
        }
        if let (Some(a), Some(b)) = (s.first(), g.first()) {
            if self.attempt(|r| r.node(a, b) && r.seq(&s[1..], &g[1..])) {
                return true;
            }
        }
        // pull a later game step forward past a window of independent atomic steps
        if let Some(a) = s.first() {
            for i in 1..g.len() {
                if !g[..i].iter().all(|p| commute(p, &g[i])) {
                    break;
                }
                let kinds = std::mem::discriminant(a) == std::mem::discriminant(&g[i])
                    || matches!((a, &g[i]), (N::Assign(..), N::Random(_, true)));
                if !kinds {
                    continue;
                }
                let rest: Vec<N> = g[..i].iter().chain(&g[i + 1..]).cloned().collect();
                if self.spend()
                    && self.attempt(|r| {
                        r.steps.push(Step::Reorder(show_node(&g[i])));
                        r.node(a, &g[i]) && r.seq(&s[1..], &rest)
                    })
                {
                    return true;
                }
            }
        }
        if let Some(N::Test(f, true)) = s.first() {
            if self.spend()
                && self.attempt(|r| {
                    r.steps.push(Step::DropAngelTest(printer::formula(f)));
                    r.seq(&s[1..], g)
                })
            {
                return true;
            }
        }
        if let Some(N::Test(f, false)) = g.first() {
            if self.spend()
                && self.attempt(|r| {
                    r.steps.push(Step::DropDemonTest(printer::formula(f)));
                    r.seq(s, &g[1..])
                })
            {
                return true;
            }
        }
        // a;{b ++ c} against {a;b} ++ {a;c} and the like
        if let (Some(N::Choice(a, b, k)), Some(N::Choice(c, d, k2))) = (s.first(), g.first()) {
            if k == k2 && (s.len() > 1 || g.len() > 1) && self.spend() {
                let ds = N::Choice([&a[..], &s[1..]].concat(), [&b[..], &s[1..]].concat(), *k);
                let dg = N::Choice([&c[..], &g[1..]].concat(), [&d[..], &g[1..]].concat(), *k);
                if self.attempt(|r| {
                    r.steps.push(Step::Distribute);
                    r.node(&ds, &dg)
                }) {
                    return true;
                }
            }
        }
        if let Some(N::Choice(c, d, true)) = g.first() {
            if !matches!(s.first(), Some(N::Choice(_, _, true))) {
                for (i, arm) in [c, d].into_iter().enumerate() {
                    if self.spend()
                        && self.attempt(|r| {
                            r.steps.push(Step::PickBranch(i));
                            r.seq(s, &[&arm[..], &g[1..]].concat())
                        })
                    {
                        return true;
                    }
                }
            }
        }
        if self.budget == 0 {
            return self.fail(s, g, "the rewrite budget is exhausted");
        }
        match (s.first(), g.first()) {
            (Some(_), None) => self.fail(s, g, "the strategy continues past the end of the game"),
            (None, Some(_)) => self.fail(s, g, "the strategy ends before the game does"),
            _ => self.fail(s, g, "no refinement rule applies"),
        }
    }

    fn node(&mut self, a: &N, b: &N) -> bool {
        let one = |x: &N| [x.clone()];
        match (a, b) {
            (N::Assign(x, t), N::Assign(y, u)) if x == y => {
                if same_term(t, u) {
                    self.steps.push(Step::Match("assignment"));
                    true
                } else {
                    self.fail(&one(a), &one(b), format!("`{}` is assigned a different value", x))
                }
            }
            (N::Assign(x, _), N::Random(y, true)) if x == y => {
                self.steps.push(Step::AssignRefinesRandom(x.to_string()));
                true
            }
            (N::Random(x, k), N::Random(y, k2)) if x == y && k == k2 => {
                self.steps.push(Step::Match("nondeterministic assignment"));
                true
            }
            (N::Test(p, k), N::Test(q, k2)) if k == k2 => {
                // Demon's tests may be weaker in the strategy, Angel's stronger.
                let ok = if *k { self.implies(p, q) } else { self.implies(q, p) };
                if !ok {
                    let dir = if *k { "does not imply" } else { "is not implied by" };
                    return self.fail(&one(a), &one(b), format!("the strategy's test {} the game's", dir));
                }
                self.steps.push(if p == q {
                    Step::Match("test")
                } else {
                    Step::Strengthen(printer::formula(p), printer::formula(q))
                });
                true
            }
            (N::Ode(es, p, k), N::Ode(eg, q, k2)) if k == k2 => {
                let same_eqs = es.len() == eg.len()
                    && es.iter().all(|(x, t)| eg.iter().any(|(y, u)| x == y && same_term(t, u)));
                if !same_eqs {
                    return self.fail(&one(a), &one(b), "the differential equations differ");
                }
                let ok = if *k { self.implies(p, q) } else { self.implies(q, p) };
                if !ok {
                    return self.fail(&one(a), &one(b), "the domain constraints are incompatible");
                }
                self.steps.push(Step::Match("ODE"));
                true
            }
            (N::Choice(x, y, k), N::Choice(u, v, k2)) if k == k2 => {
                let mark = self.steps.len();
                self.steps.push(Step::Match("choice"));
                if self.attempt(|r| r.seq(x, u) && r.seq(y, v)) || self.attempt(|r| r.seq(x, v) && r.seq(y, u)) {
                    return true;
                }
                self.steps.truncate(mark);
                false
            }
            (N::Repeat(x, k), N::Repeat(y, k2)) if k == k2 => {
                let mark = self.steps.len();
                self.steps.push(Step::Match("loop"));
                if self.seq(x, y) {
                    return true;
                }
                self.steps.truncate(mark);
                false
            }
            (N::Call(m), N::Call(n)) if m == n => {
                self.steps.push(Step::Match("game call"));
                true
            }
            _ => self.fail(&one(a), &one(b), "the strategy and game disagree here"),
        }
    }
}

/// Does the strategy game `s` refine the game `g`?
pub fn refines(s: &Game, g: &Game, backend: &Backend) -> Trace {
    let mut r = Refiner { backend, budget: REWRITE_BUDGET, steps: Vec::new(), failure: None };
    let ok = r.seq(&normed(s, false), &normed(g, false));
    if ok {
        Trace { steps: r.steps, failure: None }
    } else {
        let failure = r.failure.unwrap_or(Failure {
            strategy: String::new(),
            game: String::new(),
            reason: "no refinement rule applies".into(),
        });
        Trace { steps: r.steps, failure: Some(failure) }
    }
}

/// Check `target` (`[α]φ` or `P -> [α]φ`) against a reified conclusion.
pub fn proves(el: &Elaborated, c: &Conclusion, target: &Formula, backend: &Backend, span: Span) -> Result<Trace, Diagnostic> {
    let target = el.defs.formula(target).map_err(|e| Diagnostic::error(span, e.to_string()))?;
    let (game, post) = match &target {
        Formula::Box(a, phi) => ((**a).clone(), (**phi).clone()),
        Formula::Imply(p, rest) => match &**rest {
            Formula::Box(a, phi) => (seq(vec![Game::Test((**p).clone()), (**a).clone()]), (**phi).clone()),
            _ => return Err(shape(span)),
        },
        _ => return Err(shape(span)),
    };
    let trace = refines(&c.game, &game, backend);
    if let Some(f) = &trace.failure {
        return Err(Diagnostic::error(span, format!("the strategy does not play the game: {}", f.reason))
            .with_hint(format!("at strategy `{}` against game `{}`", f.strategy, f.game)));
    }
    let hyps: Vec<Formula> = c.post.conjuncts().into_iter().cloned().collect();
    let v = backend
        .check("postcondition", &hyps, &post, Strategy::Auto)
        .map_err(|e| Diagnostic::error(span, format!("cannot prove the postcondition: {}", e)))?;
    if !v.is_valid() {
        return Err(Diagnostic::error(
            span,
            format!("the proven postcondition `{}` does not imply `{}`", printer::formula(&c.post), printer::formula(&post)),
        )
        .with_hint(v.describe()));
    }
    Ok(trace)
}

fn shape(span: Span) -> Diagnostic {
    Diagnostic::error(span, "a `proves` target must have the form `[α]φ` or `P -> [α]φ`")
}

#[cfg(test)]
mod tests;

//! Proof checking of elaborated documents.
//!
//! The checker walks the SSA program keeping an ordered context of named
//! facts plus a table of definitional equations for deterministic variants.
//! Every assertion becomes an arithmetic obligation over the facts it is
//! allowed to use and the definitions those facts depend on.

mod flow;
mod kernel;
mod odes;

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::Zero;

use crate::arith::eval::{self, Env};
use crate::arith::prop;
use crate::arith::ratfun::divisors;
use crate::arith::valid::{Backend, Strategy, Verdict};
use crate::ast::*;
use crate::elab::{unssa_formula, unssa_term, Elaborated, IKind, IStmt};
use crate::printer;
use crate::span::{Diagnostic, Span};
use crate::vars::{Subst, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Plain,
    /// Mentions forward-ghost variables or was established inside a ghost.
    Ghost,
    /// Established inside an inverse ghost; usable only there.
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Assumed,
    Proved,
}

#[derive(Clone, Debug)]
pub struct Fact {
    pub name: String,
    pub named: bool,
    pub fml: Formula,
    pub status: Status,
    pub origin: Origin,
    /// Introduced outside every loop body and branch, and eligible for
    /// export as a conclusion.
    pub top: bool,
    /// The formula with located expressions unresolved, when it has any;
    /// renaming variants must not touch what those expressions denote.
    pub raw: Option<Formula>,
}

impl Fact {
    /// The fact with variants renamed, keeping located references fixed.
    pub(crate) fn renamed(&self, el: &Elaborated, s: &Subst) -> (Formula, Option<Formula>) {
        match &self.raw {
            Some(r) => {
                let r = rename(r, s);
                (el.fill(&r), Some(r))
            }
            None => (rename(&self.fml, s), None),
        }
    }
}

/// One arithmetic obligation and how it was discharged.
#[derive(Clone, Debug)]
pub struct Obligation {
    pub label: String,
    pub span: Span,
    pub method: String,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    pub millis: u128,
    pub hyps: Vec<Formula>,
    pub goal: Formula,
}

impl Obligation {
    pub fn valid(&self) -> bool {
        self.verdict.as_ref().map(|v| v.is_valid()).unwrap_or(false)
    }

    pub fn summary(&self) -> String {
        let result = match (&self.verdict, &self.error) {
            (_, Some(e)) => format!("error: {}", e),
            (Some(v), None) => v.describe(),
            (None, None) => "skipped".into(),
        };
        format!("{}:{}: {} [{}] {}", self.span.line, self.span.col, self.label, self.method, result)
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub backend: Backend,
    /// Margin for `by guard` when none is written.
    pub delta: Option<Rat>,
    /// Prefix for exported obligation files.
    pub name: String,
}

impl Default for Config {
    fn default() -> Config {
        Config { backend: Backend::default(), delta: None, name: "proof".into() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Checked {
    pub diagnostics: Vec<Diagnostic>,
    pub obligations: Vec<Obligation>,
    pub prints: Vec<(Span, String)>,
    /// Context at the end of the document.
    pub facts: Vec<Fact>,
}

impl Checked {
    pub fn ok(&self) -> bool {
        !self.diagnostics.iter().any(|d| d.is_error())
    }
}

/// Exit condition of the most recent `for` loop, for `by guard`.
#[derive(Clone, Debug)]
struct Exit {
    guard: Vec<Formula>,
}

pub(crate) struct Checker<'a> {
    el: &'a Elaborated,
    cfg: &'a Config,
    ctx: Vec<Fact>,
    /// Defining equations of deterministic variants.
    defs: BTreeMap<Var, Vec<Formula>>,
    consts: Env,
    mode: GhostKind,
    depth: usize,
    anon: usize,
    exit: Option<Exit>,
    /// Fact produced by the statement just checked, a loop's invariant.
    prev: Option<Fact>,
    out: Checked,
}

pub fn check(el: &Elaborated, cfg: &Config) -> Checked {
    let mut c = Checker {
        el,
        cfg,
        ctx: Vec::new(),
        defs: BTreeMap::new(),
        consts: Env::new(),
        mode: GhostKind::None,
        depth: 0,
        anon: 0,
        exit: None,
        prev: None,
        out: Checked::default(),
    };
    c.block(&el.stmts);
    c.out.facts = std::mem::take(&mut c.ctx);
    c.out
}

pub(crate) fn rename(f: &Formula, s: &Subst) -> Formula {
    f.subst(s).unwrap_or_else(|_| f.map_terms(&mut |t| t.subst(s)))
}

fn bases(vs: &VarSet) -> Vec<&str> {
    vs.iter().map(|v| v.name.as_str()).collect()
}

fn has_fractional_pow(t: &Term) -> bool {
    match t {
        Term::Num(_) | Term::Var(_) => false,
        Term::Pow(a, e) => !e.is_integer() || has_fractional_pow(a),
        Term::Neg(a) => has_fractional_pow(a),
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
            has_fractional_pow(a) || has_fractional_pow(b)
        }
        Term::App(_, args) => args.iter().any(has_fractional_pow),
        Term::At(a, _) => has_fractional_pow(a),
    }
}

/// Non-constant divisors occurring in a formula.
fn formula_divisors(f: &Formula) -> Vec<Term> {
    let mut out = Vec::new();
    f.map_terms(&mut |t| {
        divisors(t, &mut out);
        t.clone()
    });
    let mut uniq: Vec<Term> = Vec::new();
    for d in out {
        if !d.free_vars().is_empty() && !uniq.contains(&d) {
            uniq.push(d);
        }
    }
    uniq
}

fn push_unique(v: &mut Vec<Formula>, f: Formula) {
    if !v.contains(&f) {
        v.push(f);
    }
}

impl<'a> Checker<'a> {
    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.out.diagnostics.push(Diagnostic::error(span, msg));
    }

    fn diag(&mut self, d: Diagnostic) {
        self.out.diagnostics.push(d);
    }

    fn mode_status(&self) -> Status {
        match self.mode {
            GhostKind::None => Status::Plain,
            GhostKind::Forward => Status::Ghost,
            GhostKind::Inverse => Status::Inverse,
        }
    }

    fn mentions_ghost(&self, f: &Formula) -> bool {
        f.free_vars().iter().any(|v| self.el.is_ghost(&v.name))
    }

    /// Status for a new fact about `f` in the current mode.
    fn status_of(&self, f: &Formula) -> Status {
        let s = self.mode_status();
        if s == Status::Plain && self.mentions_ghost(f) {
            Status::Ghost
        } else {
            s
        }
    }

    fn visible(&self, f: &Fact) -> bool {
        f.status != Status::Inverse || self.mode == GhostKind::Inverse
    }

    fn hidden_var(&self, x: &Var) -> bool {
        self.mode != GhostKind::Inverse && self.el.is_inverse_variant(x)
    }

    /// Ghost and inverse-ghost variables may only be mentioned where the
    /// game cannot observe them.
    fn check_mentions(&mut self, f: &Formula, span: Span, allow_ghost: bool) -> bool {
        for v in f.free_vars() {
            if self.hidden_var(&v) {
                self.error(span, format!("`{}` belongs to an inverse ghost and can only be mentioned inside one", v.name));
                return false;
            }
            if self.mode == GhostKind::None && !allow_ghost && self.el.is_ghost(&v.name) {
                self.diag(
                    Diagnostic::error(span, format!("`{}` is a ghost variable, but this fact is not a ghost", v.name))
                        .with_hint("state facts about ghost variables inside /++ ... ++/"),
                );
                return false;
            }
        }
        true
    }

    fn add_fact(&mut self, name: Option<&str>, fml: Formula, status: Status, origin: Origin) -> Fact {
        let (name, named) = match name {
            Some(n) => (n.to_string(), true),
            None => {
                self.anon += 1;
                (format!("_{}", self.anon), false)
            }
        };
        let f = Fact { name, named, fml, status, origin, top: self.depth == 0, raw: None };
        self.ctx.push(f.clone());
        f
    }

    /// Attach the unresolved form recorded for the statement at `span`.
    fn with_raw(&mut self, _added: Fact, span: Span) -> Fact {
        let raw = self.el.raw.get(&span.start).cloned();
        let last = self.ctx.last_mut().expect("fact just added");
        last.raw = raw;
        last.clone()
    }

    fn lookup(&self, name: &str) -> Option<&Fact> {
        self.ctx.iter().rev().find(|f| f.name == name)
    }

    fn define(&mut self, x: &Var, f: Formula) {
        self.defs.entry(x.clone()).or_default().push(f);
    }

    /// Definitions of every variant reachable from `fs`.
    fn closure(&self, fs: &[Formula]) -> Vec<Formula> {
        let mut seen = VarSet::new();
        let mut todo: Vec<Var> = fs.iter().flat_map(|f| f.free_vars()).collect();
        let mut out = Vec::new();
        while let Some(v) = todo.pop() {
            if !seen.insert(v.clone()) || self.hidden_var(&v) {
                continue;
            }
            for d in self.defs.get(&v).into_iter().flatten() {
                push_unique(&mut out, d.clone());
                todo.extend(d.free_vars());
            }
        }
        out
    }

    /// Visible facts sharing a variable name with the goal or with the
    /// definitions it depends on.
    fn defaults(&self, goal: &Formula) -> Vec<Formula> {
        let mut vs = goal.free_vars();
        for d in self.closure(std::slice::from_ref(goal)) {
            vs.extend(d.free_vars());
        }
        let names = bases(&vs);
        let mut out = Vec::new();
        for f in &self.ctx {
            if self.visible(f) && f.fml.free_vars().iter().any(|v| names.contains(&v.name.as_str())) {
                push_unique(&mut out, f.fml.clone());
            }
        }
        out
    }

    /// Facts selected by a `using` list; `None` after reporting an error.
    fn select(&mut self, items: &[ProofTerm], goal: &Formula, span: Span) -> Option<Vec<Formula>> {
        let mut out = Vec::new();
        for it in items {
            match it {
                ProofTerm::Ellipsis => {
                    for f in self.defaults(goal) {
                        push_unique(&mut out, f);
                    }
                }
                ProofTerm::Fact(n) if self.lookup(n).is_none() => {
                    let mentioning: Vec<Formula> = self
                        .ctx
                        .iter()
                        .filter(|f| self.visible(f) && f.fml.free_vars().iter().any(|v| v.name == *n))
                        .map(|f| f.fml.clone())
                        .collect();
                    let is_var = !mentioning.is_empty() || self.defs.keys().any(|v| v.name == *n);
                    if !is_var {
                        self.error(span, format!("unknown fact `{}`", n));
                        return None;
                    }
                    for f in mentioning {
                        push_unique(&mut out, f);
                    }
                }
                _ => {
                    let (f, _) = self.proof_term(it, span)?;
                    push_unique(&mut out, f);
                }
            }
        }
        Some(out)
    }

    /// Discharge `hyps ⊢ goal` after adding definitions, recording the
    /// obligation and reporting failure.
    fn discharge(&mut self, label: &str, span: Span, hyps: Vec<Formula>, goal: &Formula, how: Strategy) -> bool {
        for den in formula_divisors(goal) {
            let nz = Formula::cmp(Cmp::Ne, den.clone(), Term::num(0));
            let mut h = hyps.clone();
            for f in self.defaults(&nz) {
                push_unique(&mut h, f);
            }
            if !self.run(&format!("{} (denominator)", label), span, h, &nz, Strategy::Auto) {
                return false;
            }
        }
        self.run(label, span, hyps, goal, how)
    }

    fn run(&mut self, label: &str, span: Span, mut hyps: Vec<Formula>, goal: &Formula, how: Strategy) -> bool {
        let mut all = hyps.clone();
        all.push(goal.clone());
        for d in self.closure(&all) {
            push_unique(&mut hyps, d);
        }
        let method = match how {
            Strategy::Prop => "prop",
            Strategy::Rcf => "rcf",
            Strategy::Auto => "auto",
        };
        let file_label = format!("{}-{}-{}", self.cfg.name, span.line, span.col);
        let start = Instant::now();
        let res = self.cfg.backend.check(&file_label, &hyps, goal, how);
        let millis = start.elapsed().as_millis();
        let mut ob = Obligation {
            label: label.to_string(),
            span,
            method: method.into(),
            verdict: None,
            error: None,
            millis,
            hyps,
            goal: goal.clone(),
        };
        let ok = match res {
            Ok(v) => {
                let ok = v.is_valid();
                if !ok {
                    let shown = printer::formula(&unssa_formula(goal));
                    self.diag(
                        Diagnostic::error(span, format!("cannot prove {}: `{}`", label, shown)).with_hint(v.describe()),
                    );
                }
                ob.verdict = Some(v);
                ok
            }
            Err(e) => {
                self.error(span, format!("cannot check {}: {}", label, e));
                ob.error = Some(e.to_string());
                false
            }
        };
        self.out.obligations.push(ob);
        ok
    }

    /// Prove an assertion with its `using` list and method.
    fn prove(&mut self, label: &str, span: Span, goal: &Formula, using: Option<&[ProofTerm]>, method: Option<&Method>) -> bool {
        let hyps = match using {
            None => self.defaults(goal),
            Some(items) => match self.select(items, goal, span) {
                Some(h) => h,
                None => return false,
            },
        };
        match method {
            Some(Method::Guard(d)) => self.by_guard(label, span, goal, hyps, d.as_ref()),
            Some(Method::Solution) | Some(Method::Induction) => {
                self.error(span, "`by solution` and `by induction` only apply to assertions in an ODE domain");
                false
            }
            Some(Method::Prop) => self.discharge(label, span, hyps, goal, Strategy::Prop),
            Some(Method::Rcf) => self.discharge(label, span, hyps, goal, Strategy::Rcf),
            Some(Method::Auto) | None => self.discharge(label, span, hyps, goal, Strategy::Auto),
        }
    }

    fn label_of(name: &Option<String>, f: &Formula) -> String {
        match name {
            Some(n) => format!("`{}`", n),
            None => format!("`{}`", printer::formula(&unssa_formula(f))),
        }
    }

    /// Check a block; returns the fact produced by its last statement,
    /// ignoring trailing labels and prints.
    fn block(&mut self, stmts: &[IStmt]) -> Option<Fact> {
        let mut last = None;
        for s in stmts {
            let produced = self.stmt(s);
            if !matches!(s.kind, IKind::Label(_) | IKind::Print(_)) {
                self.prev = produced.clone();
                last = produced;
            }
        }
        last
    }

    fn in_mode(&mut self, mode: GhostKind, stmts: &[IStmt], span: Span) -> Option<Fact> {
        if self.mode != GhostKind::None && self.mode != mode {
            self.error(span, "forward and inverse ghosts cannot be nested in each other");
        }
        let saved = self.mode;
        self.mode = mode;
        let r = self.block(stmts);
        self.mode = saved;
        r
    }

    fn stmt(&mut self, s: &IStmt) -> Option<Fact> {
        let span = s.span;
        match &s.kind {
            IKind::Assume { name, fml } => {
                self.check_mentions(fml, span, false);
                let st = self.status_of(fml);
                let f = self.add_fact(name.as_deref(), fml.clone(), st, Origin::Assumed);
                Some(self.with_raw(f, span))
            }
            IKind::Assert { name, fml, using, method } => {
                self.check_mentions(fml, span, false);
                let label = Self::label_of(name, fml);
                self.prove(&label, span, fml, using.as_deref(), method.as_ref());
                let st = self.status_of(fml);
                let f = self.add_fact(name.as_deref(), fml.clone(), st, Origin::Proved);
                Some(self.with_raw(f, span))
            }
            IKind::Assign { name, fact, var, rhs } => self.assign(name.as_deref(), *fact, var, rhs.as_ref(), span),
            IKind::Ode(o) => self.ode(o, span),
            IKind::Loop { carried, body, .. } => {
                let inv = self.prev.clone();
                self.demonic_loop(carried, body, span, inv)
            }
            IKind::For(f) => self.for_loop(f, span),
            IKind::Switch { scrutinee, cases, merges, .. } => {
                self.switch(scrutinee.as_ref(), cases, merges, span);
                None
            }
            IKind::Choice { branches, merges, .. } => {
                let arms: Vec<(Option<(Option<String>, Formula)>, &[IStmt])> =
                    branches.iter().map(|b| (None, b.as_slice())).collect();
                self.branches(&arms, merges);
                None
            }
            IKind::Note { name, pt } => {
                let (f, st) = self.proof_term(pt, span)?;
                let st = st.max(self.status_of(&f));
                Some(self.add_fact(Some(name), f, st, Origin::Proved))
            }
            IKind::Ghost(b) => self.in_mode(GhostKind::Forward, b, span),
            IKind::InverseGhost(b) => self.in_mode(GhostKind::Inverse, b, span),
            IKind::Label(_) => None,
            IKind::Print(e) => {
                let text = match e {
                    Expr::Term(t) => printer::term(&unssa_term(t)),
                    Expr::Formula(f) => printer::formula(&unssa_formula(f)),
                };
                self.out.prints.push((span, text));
                None
            }
            IKind::Block(b) => self.block(b),
        }
    }

    fn assign(&mut self, name: Option<&str>, fact: bool, var: &Var, rhs: Option<&Term>, span: Span) -> Option<Fact> {
        let t = rhs?;
        let eq0 = Formula::cmp(Cmp::Eq, Term::Var(var.clone()), t.clone());
        for den in formula_divisors(&eq0) {
            let nz = Formula::cmp(Cmp::Ne, den, Term::num(0));
            let hyps = self.defaults(&nz);
            self.run(&format!("`{}` assignment (denominator)", var.name), span, hyps, &nz, Strategy::Auto);
        }
        let t = if has_fractional_pow(t) {
            let env = self.known_values();
            match eval::term(t, &env) {
                Some(v) => Term::Num(v),
                None => {
                    self.error(span, format!("`{}` uses a fractional power of a value that is not a known constant", var.name));
                    t.clone()
                }
            }
        } else {
            t.clone()
        };
        if let Some(v) = eval::term(&t, &self.known_values()) {
            self.consts.insert(var.clone(), v);
        }
        let eq = Formula::cmp(Cmp::Eq, Term::Var(var.clone()), t);
        self.define(var, eq.clone());
        if fact {
            self.check_mentions(&eq, span, false);
            let st = self.status_of(&eq);
            let f = self.add_fact(name, eq, st, Origin::Assumed);
            return Some(self.with_raw(f, span));
        }
        None
    }

    /// Constant values of variants known from assignments and from
    /// equality facts `x = c`.
    fn known_values(&self) -> Env {
        let mut env = self.consts.clone();
        for f in &self.ctx {
            for c in f.fml.conjuncts() {
                if let Formula::Cmp(Cmp::Eq, Term::Var(x), Term::Num(n)) = c {
                    env.entry(x.clone()).or_insert_with(|| n.clone());
                }
            }
        }
        env
    }

    /// `by guard`: the goal follows from the negated for-loop guard,
    /// weakened by a positive margin.
    fn by_guard(&mut self, label: &str, span: Span, goal: &Formula, mut hyps: Vec<Formula>, d: Option<&Term>) -> bool {
        let Some(exit) = self.exit.clone() else {
            self.error(span, "`by guard` needs a preceding for loop");
            return false;
        };
        let delta = match (d, &self.cfg.delta) {
            (Some(t), _) => t.clone(),
            (None, Some(r)) => Term::Num(r.clone()),
            (None, None) => match self.margin_candidate() {
                Some(v) => Term::Var(v),
                None => {
                    self.diag(
                        Diagnostic::error(span, "no positive margin in scope for `by guard`")
                            .with_hint("write the margin explicitly as `by guard(e)`"),
                    );
                    return false;
                }
            },
        };
        let pos = Formula::cmp(Cmp::Gt, delta.clone(), Term::num(0));
        let ph = self.defaults(&pos);
        if !self.run(&format!("{} (margin)", label), span, ph, &pos, Strategy::Auto) {
            return false;
        }
        let mut arms = Vec::new();
        for g in &exit.guard {
            match weaken(g, &delta) {
                Some(w) => arms.push(w),
                None => {
                    self.error(span, format!("cannot weaken the equality guard `{}`", printer::formula(&unssa_formula(g))));
                    return false;
                }
            }
        }
        push_unique(&mut hyps, Formula::disj(arms));
        self.discharge(label, span, hyps, goal, Strategy::Auto)
    }

    /// A variable with a fact `v > 0` (or `v >= k` for positive `k`),
    /// choosing the first name in case-insensitive order.
    fn margin_candidate(&self) -> Option<Var> {
        let mut cands: Vec<Var> = Vec::new();
        for f in self.ctx.iter().filter(|f| self.visible(f)) {
            for c in f.fml.conjuncts() {
                let v = match c {
                    Formula::Cmp(Cmp::Gt, Term::Var(v), k) | Formula::Cmp(Cmp::Lt, k, Term::Var(v))
                        if crate::parser::const_fold(k).map(|k| k >= Rat::zero()).unwrap_or(false) =>
                    {
                        Some(v)
                    }
                    Formula::Cmp(Cmp::Ge, Term::Var(v), k) | Formula::Cmp(Cmp::Le, k, Term::Var(v))
                        if crate::parser::const_fold(k).map(|k| k > Rat::zero()).unwrap_or(false) =>
                    {
                        Some(v)
                    }
                    _ => None,
                };
                if let Some(v) = v {
                    if !cands.contains(v) {
                        cands.push(v.clone());
                    }
                }
            }
        }
        cands.into_iter().min_by(|a, b| (a.name.to_lowercase(), &a.name).cmp(&(b.name.to_lowercase(), &b.name)))
    }

    /// Classical validity check shared by totality tests; no Harrop gate.
    fn classical(&mut self, label: &str, span: Span, hyps: Vec<Formula>, goal: &Formula) -> Option<Verdict> {
        let start = Instant::now();
        let res = self.cfg.backend.classical(&format!("{}-{}-{}", self.cfg.name, span.line, span.col), &hyps, goal);
        let ob = Obligation {
            label: label.to_string(),
            span,
            method: "classical".into(),
            verdict: res.as_ref().ok().cloned(),
            error: res.as_ref().err().map(|e| e.to_string()),
            millis: start.elapsed().as_millis(),
            hyps,
            goal: goal.clone(),
        };
        self.out.obligations.push(ob);
        res.ok()
    }

    fn prop_holds(&self, hyps: &[Formula], goal: &Formula) -> bool {
        prop::prove(hyps, goal)
    }
}

/// Negation of a guard comparison, weakened by `delta`.
fn weaken(g: &Formula, delta: &Term) -> Option<Formula> {
    let sub = |a: &Term| Term::Sub(Box::new(a.clone()), Box::new(delta.clone()));
    let add = |a: &Term| Term::Add(Box::new(a.clone()), Box::new(delta.clone()));
    Some(match g {
        Formula::Cmp(Cmp::Le | Cmp::Lt, a, b) => Formula::cmp(Cmp::Ge, a.clone(), sub(b)),
        Formula::Cmp(Cmp::Ge | Cmp::Gt, a, b) => Formula::cmp(Cmp::Le, a.clone(), add(b)),
        Formula::Cmp(Cmp::Eq, ..) => return None,
        other => Formula::not(other.clone()),
    })
}

#[cfg(test)]
mod tests;

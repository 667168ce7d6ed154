//! Second pass: resolve located expressions to terms over variants that are
//! already assigned at the referrer.
//!
//! The expression is first renamed with the label's snapshot and its
//! parameters replaced by the arguments. Any variant not yet assigned at the
//! referrer is then replaced by its definition: the assigned term, the
//! branch source of a merge when the referrer sits in that branch, or the
//! ODE solution at the duration fixed by a clock argument. Variants that
//! remain undetermined must become label parameters.

use std::collections::BTreeSet;

use super::ssa::{placeholder_id, Occ, Ssa};
use super::*;
use crate::vars::{Subst, VarSet};

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Todo,
    Busy,
    Done,
    Failed,
}

struct Resolver<'a> {
    s: &'a mut Ssa,
    results: Vec<Option<Expr>>,
    state: Vec<State>,
    stack: Vec<usize>,
    /// Labels each occurrence's resolution went through.
    used: Vec<BTreeSet<String>>,
}

pub(super) fn resolve_all(s: &mut Ssa) -> Result<Vec<Expr>, Vec<Diagnostic>> {
    let n = s.occs.len();
    let mut r = Resolver { s, results: vec![None; n], state: vec![State::Todo; n], stack: vec![], used: vec![BTreeSet::new(); n] };
    let mut errors: Vec<Diagnostic> = vec![];
    for id in 0..n {
        if let Err(Some(d)) = r.resolve(id) {
            if !errors.iter().any(|e| e.message == d.message && e.span.start == d.span.start) {
                errors.push(d);
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(r.results.into_iter().map(|e| e.expect("resolved")).collect())
}

fn expr_vars(e: &Expr) -> VarSet {
    match e {
        Expr::Term(t) => t.free_vars(),
        Expr::Formula(f) => f.free_vars(),
    }
}

fn subst_expr(e: &Expr, s: &Subst) -> Expr {
    if s.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Term(t) => Expr::Term(t.subst(s)),
        Expr::Formula(f) => Expr::Formula(f.map_terms(&mut |t| t.subst(s))),
    }
}

fn rename_expr(e: &Expr, label: &LabelInfo) -> Expr {
    let mut f = |v: &Var| if v.idx.is_none() { Some(Term::Var(label.variant(&v.name))) } else { None };
    match e {
        Expr::Term(t) => Expr::Term(t.map_vars(&mut f)),
        Expr::Formula(fm) => Expr::Formula(rename_formula(fm, label, &mut vec![])),
    }
}

fn rename_formula(f: &Formula, label: &LabelInfo, bound: &mut Vec<String>) -> Formula {
    let bx = Box::new;
    let term = |t: &Term, bound: &[String]| {
        t.map_vars(&mut |v| {
            if v.idx.is_none() && !bound.contains(&v.name) {
                Some(Term::Var(label.variant(&v.name)))
            } else {
                None
            }
        })
    };
    match f {
        Formula::Cmp(op, a, b) => Formula::Cmp(*op, term(a, bound), term(b, bound)),
        Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|a| term(a, bound)).collect()),
        Formula::Not(a) => Formula::Not(bx(rename_formula(a, label, bound))),
        Formula::And(a, b) => Formula::And(bx(rename_formula(a, label, bound)), bx(rename_formula(b, label, bound))),
        Formula::Or(a, b) => Formula::Or(bx(rename_formula(a, label, bound)), bx(rename_formula(b, label, bound))),
        Formula::Imply(a, b) => {
            Formula::Imply(bx(rename_formula(a, label, bound)), bx(rename_formula(b, label, bound)))
        }
        Formula::Iff(a, b) => Formula::Iff(bx(rename_formula(a, label, bound)), bx(rename_formula(b, label, bound))),
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            bound.push(x.name.clone());
            let body = rename_formula(a, label, bound);
            bound.pop();
            if matches!(f, Formula::Forall(..)) {
                Formula::Forall(x.clone(), bx(body))
            } else {
                Formula::Exists(x.clone(), bx(body))
            }
        }
        _ => f.clone(),
    }
}

fn term_placeholders(t: &Term, out: &mut BTreeSet<usize>) {
    match t {
        Term::App(f, args) => {
            if let Some(id) = placeholder_id(f) {
                out.insert(id);
            }
            args.iter().for_each(|a| term_placeholders(a, out));
        }
        Term::Num(_) | Term::Var(_) => {}
        Term::Neg(a) | Term::Pow(a, _) => term_placeholders(a, out),
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
            term_placeholders(a, out);
            term_placeholders(b, out);
        }
        Term::At(e, loc) => {
            term_placeholders(e, out);
            loc.args.iter().for_each(|a| term_placeholders(a, out));
        }
    }
}

fn formula_placeholders(f: &Formula, out: &mut BTreeSet<usize>) {
    match f {
        Formula::Pred(p, args) => {
            if let Some(id) = placeholder_id(p) {
                out.insert(id);
            }
            args.iter().for_each(|a| term_placeholders(a, out));
        }
        Formula::Cmp(_, a, b) => {
            term_placeholders(a, out);
            term_placeholders(b, out);
        }
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) | Formula::At(a, _) => {
            formula_placeholders(a, out)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Iff(a, b) => {
            formula_placeholders(a, out);
            formula_placeholders(b, out);
        }
        _ => {}
    }
}

fn expr_placeholders(e: &Expr) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    match e {
        Expr::Term(t) => term_placeholders(t, &mut out),
        Expr::Formula(f) => formula_placeholders(f, &mut out),
    }
    out
}

/// Replace placeholders by their resolutions.
pub(super) fn fill_term(t: &Term, table: &[Expr]) -> Term {
    let bx = Box::new;
    let f = |a: &Term| fill_term(a, table);
    match t {
        Term::App(name, args) => match placeholder_id(name) {
            Some(id) => match &table[id] {
                Expr::Term(r) => r.clone(),
                Expr::Formula(_) => t.clone(),
            },
            None => Term::App(name.clone(), args.iter().map(f).collect()),
        },
        Term::Num(_) | Term::Var(_) => t.clone(),
        Term::Neg(a) => Term::Neg(bx(f(a))),
        Term::Pow(a, e) => Term::Pow(bx(f(a)), e.clone()),
        Term::Add(a, b) => Term::Add(bx(f(a)), bx(f(b))),
        Term::Sub(a, b) => Term::Sub(bx(f(a)), bx(f(b))),
        Term::Mul(a, b) => Term::Mul(bx(f(a)), bx(f(b))),
        Term::Div(a, b) => Term::Div(bx(f(a)), bx(f(b))),
        Term::Min(a, b) => Term::Min(bx(f(a)), bx(f(b))),
        Term::Max(a, b) => Term::Max(bx(f(a)), bx(f(b))),
        Term::At(..) => t.clone(),
    }
}

pub(super) fn fill_formula(fm: &Formula, table: &[Expr]) -> Formula {
    let bx = Box::new;
    let f = |a: &Formula| fill_formula(a, table);
    match fm {
        Formula::Pred(p, args) => match placeholder_id(p) {
            Some(id) => match &table[id] {
                Expr::Formula(r) => r.clone(),
                Expr::Term(_) => fm.clone(),
            },
            None => Formula::Pred(p.clone(), args.iter().map(|a| fill_term(a, table)).collect()),
        },
        Formula::Cmp(op, a, b) => Formula::Cmp(*op, fill_term(a, table), fill_term(b, table)),
        Formula::Not(a) => Formula::Not(bx(f(a))),
        Formula::And(a, b) => Formula::And(bx(f(a)), bx(f(b))),
        Formula::Or(a, b) => Formula::Or(bx(f(a)), bx(f(b))),
        Formula::Imply(a, b) => Formula::Imply(bx(f(a)), bx(f(b))),
        Formula::Iff(a, b) => Formula::Iff(bx(f(a)), bx(f(b))),
        Formula::Forall(x, a) => Formula::Forall(x.clone(), bx(f(a))),
        Formula::Exists(x, a) => Formula::Exists(x.clone(), bx(f(a))),
        _ => fm.clone(),
    }
}

fn fill_expr(e: &Expr, table: &[Expr]) -> Expr {
    match e {
        Expr::Term(t) => Expr::Term(fill_term(t, table)),
        Expr::Formula(f) => Expr::Formula(fill_formula(f, table)),
    }
}

fn available(info: Option<&VarInfo>, occ: &Occ) -> bool {
    match info {
        None => true,
        Some(i) => i.seq < occ.seq && occ.scope.starts_with(&i.scope),
    }
}

fn branch_of(scope: &[Scope], choice: usize) -> Option<usize> {
    scope.iter().find_map(|s| match s {
        Scope::Branch { choice: c, branch } if *c == choice => Some(*branch),
        _ => None,
    })
}

impl Resolver<'_> {
    /// `Err(None)` means the failure was already reported.
    fn resolve(&mut self, id: usize) -> Result<Expr, Option<Diagnostic>> {
        match self.state[id] {
            State::Done => return Ok(self.results[id].clone().expect("done")),
            State::Failed => return Err(None),
            State::Busy => return Err(Some(self.cycle(id))),
            State::Todo => {}
        }
        self.state[id] = State::Busy;
        self.stack.push(id);
        let r = self.work(id);
        self.stack.pop();
        match r {
            Ok(e) => {
                self.state[id] = State::Done;
                self.results[id] = Some(e.clone());
                Ok(e)
            }
            Err(d) => {
                self.state[id] = State::Failed;
                Err(d)
            }
        }
    }

    fn cycle(&self, id: usize) -> Diagnostic {
        let pos = self.stack.iter().position(|&k| k == id).unwrap_or(0);
        let mut labels = BTreeSet::new();
        for &k in &self.stack[pos..] {
            labels.insert(self.s.occs[k].label.clone());
            labels.extend(self.used[k].iter().cloned());
        }
        let names: Vec<String> = labels.into_iter().map(|l| format!("`{}`", l)).collect();
        Diagnostic::error(
            self.s.occs[id].span,
            format!("cyclic label references through {}: the values involved are undefined", names.join(", ")),
        )
    }

    /// Resolve and substitute every placeholder in `e`.
    fn fill(&mut self, e: &Expr, parent: usize) -> Result<Expr, Option<Diagnostic>> {
        let ids = expr_placeholders(e);
        if ids.is_empty() {
            return Ok(e.clone());
        }
        let mut table: Vec<Expr> = vec![Expr::Term(Term::num(0)); self.s.occs.len()];
        for k in ids {
            table[k] = self.resolve(k)?;
            let label = self.s.occs[k].label.clone();
            let inherited: Vec<String> = self.used[k].iter().cloned().collect();
            self.used[parent].insert(label);
            self.used[parent].extend(inherited);
        }
        Ok(fill_expr(e, &table))
    }

    fn work(&mut self, id: usize) -> Result<Expr, Option<Diagnostic>> {
        let occ = self.s.occs[id].clone();
        let err = |msg: String| Some(Diagnostic::error(occ.span, msg));
        let Some(label) = self.s.labels.get(&occ.label).cloned() else {
            return Err(err(format!("unknown label `{}`", occ.label)));
        };
        if label.params.len() != occ.args.len() {
            return Err(err(format!(
                "label `{}` takes {} argument(s), got {}",
                label.name,
                label.params.len(),
                occ.args.len()
            )));
        }
        for s in &label.scope {
            match s {
                Scope::Loop(_) if !occ.scope.contains(s) => {
                    return Err(err(format!(
                        "label `{}` is inside a loop and cannot be referenced from outside it",
                        label.name
                    )));
                }
                Scope::Branch { choice, branch } => {
                    if let Some(b) = branch_of(&occ.scope, *choice) {
                        if b != *branch {
                            self.s.warnings.push(Diagnostic::warning(
                                occ.span,
                                format!("label `{}` is in a different branch of the same choice", label.name),
                            ));
                        }
                    }
                }
                _ => {}
            }
        }
        let mut params = Subst::new();
        for (p, a) in label.params.iter().zip(&occ.args) {
            let Expr::Term(a) = self.fill(&Expr::Term(a.clone()), id)? else { unreachable!() };
            params.insert(label.variant(p), a);
        }
        let mut e = subst_expr(&rename_expr(&occ.inner, &label), &params);
        for _ in 0..10_000 {
            e = self.fill(&e, id)?;
            e = subst_expr(&e, &params);
            let late: Vec<Var> = expr_vars(&e)
                .into_iter()
                .filter(|v| v.idx.is_some() && !available(self.s.vars.get(v), &occ))
                .collect();
            if late.is_empty() {
                return Ok(e);
            }
            let mut step = Subst::new();
            let mut open: BTreeSet<String> = BTreeSet::new();
            for v in late {
                let def = self.s.vars.get(&v).map(|i| i.def.clone()).unwrap_or(VarDef::Init);
                let value = match def {
                    VarDef::Assign(t) => Some(t),
                    VarDef::Merge { choice, sources } => {
                        branch_of(&occ.scope, choice).map(|b| Term::Var(sources[b].clone()))
                    }
                    VarDef::OdeExit { ode } => self.ode_value(ode, &v, &params),
                    VarDef::Duration { ode } => self.duration(ode, &params),
                    _ => None,
                };
                match value {
                    Some(t) => {
                        step.insert(v, t);
                    }
                    None => {
                        open.insert(v.name.clone());
                    }
                }
            }
            if !open.is_empty() {
                let names: Vec<String> = open.into_iter().map(|n| format!("`{}`", n)).collect();
                return Err(Some(
                    Diagnostic::error(
                        occ.span,
                        format!(
                            "cannot resolve reference to label `{}`: {} not determined between here and the label",
                            label.name,
                            names.join(", ")
                        ),
                    )
                    .with_hint(format!("make {} parameters of label `{}`", names.join(", "), label.name)),
                ));
            }
            e = subst_expr(&e, &step);
        }
        Err(err("label resolution did not terminate".into()))
    }

    /// Duration of ODE `ode` when the clock's final value is a parameter.
    fn duration(&self, ode: usize, params: &Subst) -> Option<Term> {
        let info = &self.s.odes[ode];
        let clock = info.clock.as_ref()?;
        let end = params.get(clock)?;
        let start = Term::Var(info.pre.get(clock)?.clone());
        Some(Term::Sub(Box::new(end.clone()), Box::new(start)))
    }

    fn ode_value(&self, ode: usize, v: &Var, params: &Subst) -> Option<Term> {
        let info = &self.s.odes[ode];
        let sol = info.solution.as_ref()?.get(v)?;
        let dur = self.duration(ode, params)?;
        let s: Subst = [(info.dur.clone(), dur)].into_iter().collect();
        Some(sol.to_term().subst(&s))
    }
}

// ---- filling the statement tree ----

fn fill_opt(t: &Option<Term>, table: &[Expr]) -> Option<Term> {
    t.as_ref().map(|t| fill_term(t, table))
}

fn fill_method(m: &Option<Method>, table: &[Expr]) -> Option<Method> {
    match m {
        Some(Method::Guard(Some(d))) => Some(Method::Guard(Some(fill_term(d, table)))),
        m => m.clone(),
    }
}

fn fill_one(s: &IStmt, table: &[Expr]) -> IStmt {
    let f = |x: &Formula| fill_formula(x, table);
    let kind = match &s.kind {
        IKind::Assume { name, fml } => IKind::Assume { name: name.clone(), fml: f(fml) },
        IKind::Assert { name, fml, using, method } => {
            IKind::Assert { name: name.clone(), fml: f(fml), using: using.clone(), method: fill_method(method, table) }
        }
        IKind::Assign { name, fact, var, rhs } => {
            IKind::Assign { name: name.clone(), fact: *fact, var: var.clone(), rhs: fill_opt(rhs, table) }
        }
        IKind::Ode(o) => {
            let mut o = o.clone();
            for e in &mut o.eqs {
                e.rhs = fill_term(&e.rhs, table);
            }
            for (d, _) in &mut o.dom {
                *d = match d.clone() {
                    IDom::Assume { name, fml } => IDom::Assume { name, fml: f(&fml) },
                    IDom::Assert { name, fml, using, method } => {
                        IDom::Assert { name, fml: f(&fml), using, method: fill_method(&method, table) }
                    }
                    IDom::Duration { name, var, rhs } => IDom::Duration { name, var, rhs: fill_term(&rhs, table) },
                };
            }
            IKind::Ode(o)
        }
        IKind::Loop { id, carried, body } => {
            IKind::Loop { id: *id, carried: carried.clone(), body: fill_stmts(body, table) }
        }
        IKind::For(fl) => IKind::For(Box::new(IFor {
            id: fl.id,
            init: fill_one(&fl.init, table),
            inv: fill_one(&fl.inv, table),
            guard: fill_one(&fl.guard, table),
            carried: fl.carried.clone(),
            body: fill_stmts(&fl.body, table),
            update: fill_one(&fl.update, table),
        })),
        IKind::Switch { choice, scrutinee, cases, merges } => IKind::Switch {
            choice: *choice,
            scrutinee: scrutinee.clone(),
            cases: cases
                .iter()
                .map(|c| ICase { name: c.name.clone(), guard: f(&c.guard), body: fill_stmts(&c.body, table), span: c.span })
                .collect(),
            merges: merges.clone(),
        },
        IKind::Choice { choice, branches, merges } => IKind::Choice {
            choice: *choice,
            branches: branches.iter().map(|b| fill_stmts(b, table)).collect(),
            merges: merges.clone(),
        },
        IKind::Ghost(b) => IKind::Ghost(fill_stmts(b, table)),
        IKind::InverseGhost(b) => IKind::InverseGhost(fill_stmts(b, table)),
        IKind::Block(b) => IKind::Block(fill_stmts(b, table)),
        IKind::Print(e) => IKind::Print(fill_expr(e, table)),
        k @ (IKind::Note { .. } | IKind::Label(_)) => k.clone(),
    };
    IStmt { kind, span: s.span }
}

pub(super) fn fill_stmts(stmts: &[IStmt], table: &[Expr]) -> Vec<IStmt> {
    stmts.iter().map(|s| fill_one(s, table)).collect()
}

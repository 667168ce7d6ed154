//! First pass: SSA renaming, definition expansion and lifting of located
//! expressions into placeholders.

use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::defs::Defs;
use crate::ode;

/// A located expression awaiting resolution.
#[derive(Clone, Debug)]
pub(super) struct Occ {
    /// Expression over base names with definitions expanded.
    pub inner: Expr,
    pub label: String,
    /// Arguments, already elaborated at the referrer.
    pub args: Vec<Term>,
    pub seq: usize,
    pub scope: Vec<Scope>,
    pub span: Span,
}

pub(super) fn placeholder(id: usize) -> String {
    format!("@{}", id)
}

pub(super) fn placeholder_id(name: &str) -> Option<usize> {
    name.strip_prefix('@')?.parse().ok()
}

pub(super) struct Ssa {
    cur: BTreeMap<String, u32>,
    next: BTreeMap<String, u32>,
    pub vars: BTreeMap<Var, VarInfo>,
    seq: usize,
    scope: Vec<Scope>,
    pub defs: Defs,
    pub labels: BTreeMap<String, LabelInfo>,
    pub occs: Vec<Occ>,
    pub odes: Vec<OdeInfo>,
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
    mode: GhostKind,
    pub ghost_vars: BTreeSet<String>,
    pub inverse_vars: BTreeSet<String>,
    ghost_assigns: Vec<(String, Span)>,
    game_vars: BTreeSet<String>,
    choices: usize,
    loops: usize,
}

/// Base names assigned anywhere in `stmts`.
fn assigned(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { var, .. } => {
                out.insert(var.name.clone());
            }
            StmtKind::Ode(o) => out.extend(o.eqs.iter().map(|e| e.var.name.clone())),
            StmtKind::Loop(b) | StmtKind::Ghost(b) | StmtKind::InverseGhost(b) | StmtKind::Block(b) => {
                assigned(b, out)
            }
            StmtKind::For(f) => {
                assigned(std::slice::from_ref(&f.init), out);
                assigned(std::slice::from_ref(&f.update), out);
                assigned(&f.body, out);
            }
            StmtKind::Switch { cases, .. } => cases.iter().for_each(|c| assigned(&c.body, out)),
            StmtKind::Choice(bs) => bs.iter().for_each(|b| assigned(b, out)),
            _ => {}
        }
    }
}

type R<T> = Result<T, Diagnostic>;

impl Ssa {
    fn new() -> Ssa {
        Ssa {
            cur: BTreeMap::new(),
            next: BTreeMap::new(),
            vars: BTreeMap::new(),
            seq: 0,
            scope: vec![],
            defs: Defs::default(),
            labels: BTreeMap::new(),
            occs: vec![],
            odes: vec![],
            errors: vec![],
            warnings: vec![],
            mode: GhostKind::None,
            ghost_vars: BTreeSet::new(),
            inverse_vars: BTreeSet::new(),
            ghost_assigns: vec![],
            game_vars: BTreeSet::new(),
            choices: 0,
            loops: 0,
        }
    }

    fn current(&self, base: &str) -> Var {
        Var::ssa(base, self.cur.get(base).copied().unwrap_or(0))
    }

    fn fresh(&mut self, base: &str, def: VarDef) -> Var {
        let n = self.next.entry(base.to_string()).or_insert(0);
        *n += 1;
        let v = Var::ssa(base, *n);
        self.cur.insert(base.to_string(), *n);
        self.seq += 1;
        let info = VarInfo { def, seq: self.seq, scope: self.scope.clone(), inverse: self.mode == GhostKind::Inverse };
        self.vars.insert(v.clone(), info);
        v
    }

    fn note_assigned(&mut self, base: &str, ghost: GhostKind, span: Span) {
        match (self.mode, ghost) {
            (GhostKind::Inverse, _) | (_, GhostKind::Inverse) => {
                self.inverse_vars.insert(base.to_string());
            }
            (GhostKind::Forward, _) | (_, GhostKind::Forward) => {
                self.ghost_vars.insert(base.to_string());
                self.ghost_assigns.push((base.to_string(), span));
            }
            _ => {
                self.game_vars.insert(base.to_string());
            }
        }
    }

    fn note_game_read(&mut self, vars: impl IntoIterator<Item = Var>) {
        if self.mode == GhostKind::None {
            self.game_vars.extend(vars.into_iter().map(|v| v.name));
        }
    }

    // ---- expressions ----

    fn rename_term(&self, t: &Term, bound: &[String]) -> Term {
        t.map_vars(&mut |v| if bound.contains(&v.name) { None } else { Some(Term::Var(self.current(&v.name))) })
    }

    fn rename_formula(&self, f: &Formula, bound: &mut Vec<String>) -> Formula {
        let bx = Box::new;
        match f {
            Formula::True | Formula::False | Formula::Box(..) | Formula::Diamond(..) => f.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, self.rename_term(a, bound), self.rename_term(b, bound)),
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|a| self.rename_term(a, bound)).collect()),
            Formula::Not(a) => Formula::Not(bx(self.rename_formula(a, bound))),
            Formula::And(a, b) => Formula::And(bx(self.rename_formula(a, bound)), bx(self.rename_formula(b, bound))),
            Formula::Or(a, b) => Formula::Or(bx(self.rename_formula(a, bound)), bx(self.rename_formula(b, bound))),
            Formula::Imply(a, b) => Formula::Imply(bx(self.rename_formula(a, bound)), bx(self.rename_formula(b, bound))),
            Formula::Iff(a, b) => Formula::Iff(bx(self.rename_formula(a, bound)), bx(self.rename_formula(b, bound))),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                bound.push(x.name.clone());
                let body = self.rename_formula(a, bound);
                bound.pop();
                if matches!(f, Formula::Forall(..)) {
                    Formula::Forall(x.clone(), bx(body))
                } else {
                    Formula::Exists(x.clone(), bx(body))
                }
            }
            Formula::At(..) => f.clone(),
        }
    }

    fn occurrence(&mut self, inner: Expr, loc: &Located, span: Span) -> R<usize> {
        let nested = match &inner {
            Expr::Term(t) => t.contains_at(),
            Expr::Formula(f) => formula_contains_at(f),
        };
        if nested {
            return Err(Diagnostic::error(span, "nested located expressions are not supported"));
        }
        let mut args = vec![];
        for a in &loc.args {
            let a = self.lift_term(a, span)?;
            args.push(self.rename_term(&a, &[]));
        }
        let id = self.occs.len();
        self.occs.push(Occ { inner, label: loc.label.clone(), args, seq: self.seq + 1, scope: self.scope.clone(), span });
        Ok(id)
    }

    /// Replace located subterms by placeholders (input already expanded).
    fn lift_term(&mut self, t: &Term, span: Span) -> R<Term> {
        let bx = Box::new;
        Ok(match t {
            Term::Num(_) | Term::Var(_) => t.clone(),
            Term::Neg(a) => Term::Neg(bx(self.lift_term(a, span)?)),
            Term::Pow(a, e) => Term::Pow(bx(self.lift_term(a, span)?), e.clone()),
            Term::Add(a, b) => Term::Add(bx(self.lift_term(a, span)?), bx(self.lift_term(b, span)?)),
            Term::Sub(a, b) => Term::Sub(bx(self.lift_term(a, span)?), bx(self.lift_term(b, span)?)),
            Term::Mul(a, b) => Term::Mul(bx(self.lift_term(a, span)?), bx(self.lift_term(b, span)?)),
            Term::Div(a, b) => Term::Div(bx(self.lift_term(a, span)?), bx(self.lift_term(b, span)?)),
            Term::Min(a, b) => Term::Min(bx(self.lift_term(a, span)?), bx(self.lift_term(b, span)?)),
            Term::Max(a, b) => Term::Max(bx(self.lift_term(a, span)?), bx(self.lift_term(b, span)?)),
            Term::App(f, args) => {
                let args = args.iter().map(|a| self.lift_term(a, span)).collect::<R<Vec<_>>>()?;
                Term::App(f.clone(), args)
            }
            Term::At(inner, loc) => {
                let id = self.occurrence(Expr::Term((**inner).clone()), loc, span)?;
                Term::App(placeholder(id), vec![])
            }
        })
    }

    fn lift_formula(&mut self, f: &Formula, span: Span) -> R<Formula> {
        let bx = Box::new;
        Ok(match f {
            Formula::True | Formula::False | Formula::Box(..) | Formula::Diamond(..) => f.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, self.lift_term(a, span)?, self.lift_term(b, span)?),
            Formula::Pred(p, args) => {
                Formula::Pred(p.clone(), args.iter().map(|a| self.lift_term(a, span)).collect::<R<Vec<_>>>()?)
            }
            Formula::Not(a) => Formula::Not(bx(self.lift_formula(a, span)?)),
            Formula::And(a, b) => Formula::And(bx(self.lift_formula(a, span)?), bx(self.lift_formula(b, span)?)),
            Formula::Or(a, b) => Formula::Or(bx(self.lift_formula(a, span)?), bx(self.lift_formula(b, span)?)),
            Formula::Imply(a, b) => Formula::Imply(bx(self.lift_formula(a, span)?), bx(self.lift_formula(b, span)?)),
            Formula::Iff(a, b) => Formula::Iff(bx(self.lift_formula(a, span)?), bx(self.lift_formula(b, span)?)),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), bx(self.lift_formula(a, span)?)),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), bx(self.lift_formula(a, span)?)),
            Formula::At(inner, loc) => {
                let id = self.occurrence(Expr::Formula((**inner).clone()), loc, span)?;
                Formula::Pred(placeholder(id), vec![])
            }
        })
    }

    fn term(&mut self, t: &Term, span: Span) -> R<Term> {
        let t = self.defs.term(t).map_err(|e| Diagnostic::error(span, e.to_string()))?;
        let t = self.lift_term(&t, span)?;
        Ok(self.rename_term(&t, &[]))
    }

    fn formula(&mut self, f: &Formula, span: Span) -> R<Formula> {
        let f = self.defs.formula(f).map_err(|e| Diagnostic::error(span, e.to_string()))?;
        let f = self.lift_formula(&f, span)?;
        Ok(self.rename_formula(&f, &mut vec![]))
    }

    // ---- statements ----

    fn block(&mut self, stmts: &[Stmt]) -> Vec<IStmt> {
        let mut out = vec![];
        for s in stmts {
            match self.stmt(s) {
                Ok(Some(i)) => out.push(i),
                Ok(None) => {}
                Err(d) => self.errors.push(d),
            }
        }
        out
    }

    fn one(&mut self, s: &Stmt) -> R<IStmt> {
        self.stmt(s)?.ok_or_else(|| Diagnostic::error(s.span, "expected a program statement"))
    }

    fn stmt(&mut self, s: &Stmt) -> R<Option<IStmt>> {
        let span = s.span;
        let kind = match &s.kind {
            StmtKind::Assume { name, fml } => {
                let fml = self.formula(fml, span)?;
                self.note_game_read(fml.free_vars());
                IKind::Assume { name: name.clone(), fml }
            }
            StmtKind::Assert { name, fml, using, method } => {
                let fml = self.formula(fml, span)?;
                let method = match method {
                    Some(Method::Guard(Some(d))) => Some(Method::Guard(Some(self.term(d, span)?))),
                    m => m.clone(),
                };
                IKind::Assert { name: name.clone(), fml, using: using.clone(), method }
            }
            StmtKind::Assign { name, var, rhs, fact } => {
                let rhs = match rhs {
                    Some(t) => Some(self.term(t, span)?),
                    None => None,
                };
                if let Some(t) = &rhs {
                    self.note_game_read(t.free_vars());
                }
                self.note_assigned(&var.name, GhostKind::None, span);
                let def = rhs.clone().map(VarDef::Assign).unwrap_or(VarDef::Random);
                let var = self.fresh(&var.name, def);
                IKind::Assign { name: name.clone(), fact: *fact, var, rhs }
            }
            StmtKind::Ode(o) => IKind::Ode(self.ode(o, span)?),
            StmtKind::Loop(body) => {
                let id = self.next_loop();
                let (carried, body) = self.looped(id, body, |_| Ok(()), |_| Ok(()))?;
                IKind::Loop { id, carried: carried.into_iter().map(|(c, _)| c).collect(), body }
            }
            StmtKind::For(f) => {
                let init = self.one(&f.init)?;
                let inv = self.one(&f.inv)?;
                let id = self.next_loop();
                let mut extra = BTreeSet::new();
                assigned(std::slice::from_ref(&f.update), &mut extra);
                let mut guard = None;
                let mut update = None;
                let (carried, body) = self.looped_with(
                    id,
                    &f.body,
                    &extra,
                    |me| {
                        guard = Some(me.one(&f.guard)?);
                        Ok(())
                    },
                    |me| {
                        update = Some(me.one(&f.update)?);
                        Ok(())
                    },
                )?;
                let (Some(guard), Some(update)) = (guard, update) else {
                    return Err(Diagnostic::error(span, "malformed for loop"));
                };
                let carried = carried.into_iter().map(|(c, _)| c).collect();
                IKind::For(Box::new(IFor { id, init, inv, guard, carried, body, update }))
            }
            StmtKind::Switch { scrutinee, cases } => {
                let choice = self.next_choice();
                let mut guards = vec![];
                for c in cases {
                    let g = self.formula(&c.guard, c.span)?;
                    self.note_game_read(g.free_vars());
                    guards.push(g);
                }
                let bodies: Vec<&[Stmt]> = cases.iter().map(|c| c.body.as_slice()).collect();
                let (bodies, merges) = self.branches(choice, &bodies);
                let cases = cases
                    .iter()
                    .zip(guards)
                    .zip(bodies)
                    .map(|((c, guard), body)| ICase { name: c.name.clone(), guard, body, span: c.span })
                    .collect();
                IKind::Switch { choice, scrutinee: scrutinee.clone(), cases, merges }
            }
            StmtKind::Choice(bs) => {
                let choice = self.next_choice();
                let bodies: Vec<&[Stmt]> = bs.iter().map(|b| b.as_slice()).collect();
                let (branches, merges) = self.branches(choice, &bodies);
                IKind::Choice { choice, branches, merges }
            }
            StmtKind::Note { name, pt } => IKind::Note { name: name.clone(), pt: pt.clone() },
            StmtKind::Let(def) => {
                self.define(def, span)?;
                return Ok(None);
            }
            StmtKind::Ghost(b) | StmtKind::InverseGhost(b) => {
                let forward = matches!(s.kind, StmtKind::Ghost(_));
                let saved = self.mode;
                if saved != GhostKind::None && (saved == GhostKind::Forward) != forward {
                    self.errors.push(Diagnostic::error(span, "forward and inverse ghosts cannot be nested"));
                }
                self.mode = if forward { GhostKind::Forward } else { GhostKind::Inverse };
                let body = self.block(b);
                self.mode = saved;
                if forward {
                    IKind::Ghost(body)
                } else {
                    IKind::InverseGhost(body)
                }
            }
            StmtKind::Label { name, params } => {
                if self.labels.contains_key(name) {
                    return Err(Diagnostic::error(span, format!("label `{}` is already defined", name)));
                }
                let info = LabelInfo {
                    name: name.clone(),
                    params: params.clone(),
                    snapshot: self.cur.clone(),
                    seq: self.seq + 1,
                    scope: self.scope.clone(),
                    span,
                };
                self.labels.insert(name.clone(), info);
                IKind::Label(name.clone())
            }
            StmtKind::Print(e) => IKind::Print(match e {
                Expr::Term(t) => Expr::Term(self.term(t, span)?),
                Expr::Formula(f) => Expr::Formula(self.formula(f, span)?),
            }),
            StmtKind::Block(b) => IKind::Block(self.block(b)),
        };
        Ok(Some(IStmt { kind, span }))
    }

    fn define(&mut self, def: &Def, span: Span) -> R<()> {
        let expanded = self.defs.define(def.clone()).map_err(|e| Diagnostic::error(span, e.to_string()))?;
        // located expressions in a body are resolved where the body is written
        let lifted = match expanded {
            Def::Term { name, params, body } => Def::Term { name, params, body: self.lift_term(&body, span)? },
            Def::Formula { name, params, body } => {
                Def::Formula { name, params, body: self.lift_formula(&body, span)? }
            }
            g @ Def::Game { .. } => g,
        };
        self.defs.define(lifted).map_err(|e| Diagnostic::error(span, e.to_string()))?;
        Ok(())
    }

    fn next_loop(&mut self) -> usize {
        self.loops += 1;
        self.loops - 1
    }

    fn next_choice(&mut self) -> usize {
        self.choices += 1;
        self.choices - 1
    }

    fn looped(
        &mut self,
        id: usize,
        body: &[Stmt],
        before: impl FnOnce(&mut Ssa) -> R<()>,
        after: impl FnOnce(&mut Ssa) -> R<()>,
    ) -> R<(Vec<(Carried, String)>, Vec<IStmt>)> {
        self.looped_with(id, body, &BTreeSet::new(), before, after)
    }

    /// Elaborate a loop body between merge variants of every variable the
    /// body (or `extra`) assigns. `before` runs at iteration start, `after`
    /// at iteration end, both inside the loop scope.
    fn looped_with(
        &mut self,
        id: usize,
        body: &[Stmt],
        extra: &BTreeSet<String>,
        before: impl FnOnce(&mut Ssa) -> R<()>,
        after: impl FnOnce(&mut Ssa) -> R<()>,
    ) -> R<(Vec<(Carried, String)>, Vec<IStmt>)> {
        let mut bases = extra.clone();
        assigned(body, &mut bases);
        let mut merges = vec![];
        for b in &bases {
            let pre = self.current(b);
            let merge = self.fresh(b, VarDef::LoopMerge { id, pre: pre.clone() });
            merges.push((b.clone(), pre, merge));
        }
        self.scope.push(Scope::Loop(id));
        let res = before(self);
        let stmts = self.block(body);
        let res = res.and_then(|_| after(self));
        self.scope.pop();
        res?;
        let mut carried = vec![];
        for (b, pre, merge) in merges {
            let end = self.current(&b);
            self.cur.insert(b.clone(), merge.idx.unwrap_or(0));
            carried.push((Carried { pre, merge, end }, b));
        }
        Ok((carried, stmts))
    }

    fn branches(&mut self, choice: usize, bodies: &[&[Stmt]]) -> (Vec<Vec<IStmt>>, Vec<Merge>) {
        let start = self.cur.clone();
        let mut ends = vec![];
        let mut out = vec![];
        for (i, b) in bodies.iter().enumerate() {
            self.cur = start.clone();
            self.scope.push(Scope::Branch { choice, branch: i });
            out.push(self.block(b));
            self.scope.pop();
            ends.push(self.cur.clone());
        }
        self.cur = start.clone();
        let mut bases: BTreeSet<String> = BTreeSet::new();
        for e in &ends {
            for (k, v) in e {
                if start.get(k) != Some(v) {
                    bases.insert(k.clone());
                }
            }
        }
        let mut merges = vec![];
        for b in bases {
            let sources: Vec<Var> =
                ends.iter().map(|e| Var::ssa(b.clone(), e.get(&b).copied().unwrap_or(0))).collect();
            let var = self.fresh(&b, VarDef::Merge { choice, sources: sources.clone() });
            merges.push(Merge { var, sources });
        }
        (out, merges)
    }

    fn ode(&mut self, o: &OdeProof, span: Span) -> R<IOde> {
        let id = self.odes.len();
        let mut pre = BTreeMap::new();
        let mut exits = vec![];
        let mut seen = BTreeSet::new();
        for e in &o.eqs {
            if !seen.insert(e.var.name.clone()) {
                return Err(Diagnostic::error(span, format!("variable `{}` has two derivatives", e.var.name)));
            }
            let p = self.current(&e.var.name);
            self.note_assigned(&e.var.name, e.ghost, span);
            let saved = self.mode;
            if e.ghost == GhostKind::Inverse {
                self.mode = GhostKind::Inverse;
            }
            let x = self.fresh(&e.var.name, VarDef::OdeExit { ode: id });
            self.mode = saved;
            pre.insert(x.clone(), p.clone());
            exits.push((p, x));
        }
        self.seq += 1;
        let dur = Var::ssa("_dur", id as u32 + 1);
        self.vars.insert(dur.clone(), VarInfo { def: VarDef::Duration { ode: id }, seq: self.seq, scope: self.scope.clone(), inverse: false });
        let mut eqs = vec![];
        for (e, (p, x)) in o.eqs.iter().zip(exits) {
            let rhs = self.term(&e.rhs, span)?;
            if e.ghost == GhostKind::None {
                self.note_game_read(rhs.free_vars());
            }
            eqs.push(IEq { name: e.name.clone(), pre: p, var: x, rhs, ghost: e.ghost });
        }
        let mut dom = vec![];
        for (c, sp) in &o.dom {
            let d = match c {
                DomClause::Assume { name, fml } => {
                    let fml = self.formula(fml, *sp)?;
                    self.note_game_read(fml.free_vars());
                    IDom::Assume { name: name.clone(), fml }
                }
                DomClause::Assert { name, fml, using, method } => IDom::Assert {
                    name: name.clone(),
                    fml: self.formula(fml, *sp)?,
                    using: using.clone(),
                    method: method.clone(),
                },
                DomClause::Duration { name, var, rhs } => {
                    IDom::Duration { name: name.clone(), var: self.current(&var.name), rhs: self.term(rhs, *sp)? }
                }
            };
            dom.push((d, *sp));
        }
        let solvable: Vec<(Var, Term)> =
            eqs.iter().filter(|e| e.ghost != GhostKind::Inverse).map(|e| (e.var.clone(), e.rhs.clone())).collect();
        let solution = ode::solve(&solvable, &pre, &dur);
        let clock = ode::clock(&solvable);
        self.odes.push(OdeInfo { pre, dur: dur.clone(), solution, clock });
        Ok(IOde { id, eqs, dom, dur, angelic: o.is_angelic() })
    }

    fn finish_ghost_checks(&mut self) {
        for (x, span) in &self.ghost_assigns {
            if self.game_vars.contains(x) {
                self.errors.push(Diagnostic::error(
                    *span,
                    format!("forward ghost assigns `{}`, which the game itself uses", x),
                ));
            }
        }
    }
}

pub(super) fn formula_contains_at(f: &Formula) -> bool {
    match f {
        Formula::At(..) => true,
        Formula::Cmp(_, a, b) => a.contains_at() || b.contains_at(),
        Formula::Pred(_, args) => args.iter().any(Term::contains_at),
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => formula_contains_at(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Iff(a, b) => {
            formula_contains_at(a) || formula_contains_at(b)
        }
        _ => false,
    }
}

/// Elaborate a parsed document into SSA form with every located
/// expression resolved.
pub fn elaborate(doc: &Document) -> Result<Elaborated, Vec<Diagnostic>> {
    let mut s = Ssa::new();
    let stmts = s.block(&doc.stmts);
    s.finish_ghost_checks();
    if !s.errors.is_empty() {
        return Err(s.errors);
    }
    let resolved = super::resolve::resolve_all(&mut s)?;
    let mut raw = BTreeMap::new();
    collect_raw(&stmts, &resolved, &mut raw);
    let stmts = super::resolve::fill_stmts(&stmts, &resolved);
    for info in s.vars.values_mut() {
        if let VarDef::Assign(t) = &info.def {
            info.def = VarDef::Assign(super::resolve::fill_term(t, &resolved));
        }
    }
    Ok(Elaborated {
        stmts,
        vars: s.vars,
        labels: s.labels,
        odes: s.odes,
        defs: s.defs,
        ghost_vars: s.ghost_vars.into_iter().collect(),
        inverse_vars: s.inverse_vars.into_iter().collect(),
        warnings: s.warnings,
        current: s.cur,
        located: resolved,
        raw,
    })
}

/// Fact formulas that mention located expressions, before filling, keyed
/// by the start of their statement.
fn collect_raw(stmts: &[IStmt], table: &[Expr], out: &mut BTreeMap<usize, Formula>) {
    for st in stmts {
        let fml = match &st.kind {
            IKind::Assume { fml, .. } | IKind::Assert { fml, .. } => Some(fml.clone()),
            IKind::Assign { var, rhs: Some(t), fact: true, .. } => {
                Some(Formula::cmp(Cmp::Eq, Term::Var(var.clone()), t.clone()))
            }
            _ => None,
        };
        if let Some(f) = fml {
            if super::resolve::fill_formula(&f, table) != f {
                out.insert(st.span.start, f);
            }
        }
        match &st.kind {
            IKind::Loop { body, .. } | IKind::Ghost(body) | IKind::InverseGhost(body) | IKind::Block(body) => {
                collect_raw(body, table, out)
            }
            IKind::For(f) => {
                collect_raw(&[f.init.clone(), f.inv.clone(), f.guard.clone(), f.update.clone()], table, out);
                collect_raw(&f.body, table, out);
            }
            IKind::Switch { cases, .. } => cases.iter().for_each(|c| collect_raw(&c.body, table, out)),
            IKind::Choice { branches, .. } => branches.iter().for_each(|b| collect_raw(b, table, out)),
            _ => {}
        }
    }
}

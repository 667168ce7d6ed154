//! Choices, case analysis and loops.

use num_traits::Zero;

use super::{push_unique, rename, Checker, Exit, Fact, Origin, Status};
use crate::arith::ratfun::normalize_poly;
use crate::arith::valid::{Outcome, Strategy};
use crate::ast::*;
use crate::elab::{unssa_formula, Carried, ICase, IFor, IKind, IStmt, Merge, Scope};
use crate::printer;
use crate::span::{Diagnostic, Span};
use crate::vars::Subst;

type Arm<'s> = (Option<(Option<String>, Formula)>, &'s [IStmt]);

impl<'a> Checker<'a> {
    /// Check each arm from the same starting context, then join the
    /// contexts: facts bound in every arm become disjunctions, and an
    /// anonymous summary records what each arm established.
    pub(super) fn branches(&mut self, arms: &[Arm<'_>], merges: &[Merge]) {
        let base = self.ctx.clone();
        let exit = self.exit.clone();
        let n0 = base.len();
        let mut ends: Vec<Vec<Fact>> = Vec::new();
        self.depth += 1;
        for (guard, body) in arms {
            self.ctx = base.clone();
            if let Some((name, g)) = guard {
                let st = self.status_of(g);
                self.add_fact(name.as_deref(), g.clone(), st, Origin::Assumed);
            }
            self.block(body);
            ends.push(self.ctx.split_off(n0));
        }
        self.depth -= 1;
        self.ctx = base;
        self.exit = exit;
        self.join(&ends, merges);
    }

    fn join(&mut self, ends: &[Vec<Fact>], merges: &[Merge]) {
        let to_merge = |b: usize| -> Subst {
            merges.iter().map(|m| (m.sources[b].clone(), Term::Var(m.var.clone()))).collect()
        };
        let mut summary = Vec::new();
        let mut status = self.mode_status();
        for (b, facts) in ends.iter().enumerate() {
            let mut parts: Vec<Formula> = Vec::new();
            for f in facts.iter().filter(|f| f.status != Status::Inverse) {
                push_unique(&mut parts, f.fml.clone());
                status = status.max(f.status);
            }
            for m in merges {
                parts.push(Formula::cmp(Cmp::Eq, Term::Var(m.var.clone()), Term::Var(m.sources[b].clone())));
            }
            summary.push(Formula::conj(parts));
        }
        if summary.iter().any(|s| *s != Formula::True) {
            self.add_fact(None, Formula::disj(summary), status, Origin::Proved);
            // a bookkeeping fact, not something to export as a conclusion
            self.ctx.last_mut().expect("fact just added").top = false;
        }
        let Some(first) = ends.first() else { return };
        let mut names: Vec<&str> = Vec::new();
        for f in first.iter().filter(|f| f.named) {
            if !names.contains(&f.name.as_str()) {
                names.push(&f.name);
            }
        }
        for name in names {
            let found: Option<Vec<&Fact>> =
                ends.iter().map(|facts| facts.iter().rev().find(|f| f.name == name)).collect();
            let Some(found) = found else { continue };
            let fml = Formula::disj(found.iter().enumerate().map(|(b, f)| rename(&f.fml, &to_merge(b))).collect());
            let status = found.iter().map(|f| f.status).max().unwrap_or(Status::Plain);
            let origin =
                if found.iter().all(|f| f.origin == Origin::Proved) { Origin::Proved } else { Origin::Assumed };
            self.add_fact(Some(name), fml, status, origin);
        }
    }

    pub(super) fn switch(&mut self, scrutinee: Option<&ProofTerm>, cases: &[ICase], merges: &[Merge], span: Span) {
        let guards: Vec<Formula> = cases.iter().map(|c| c.guard.clone()).collect();
        let cover = Formula::disj(guards.clone());
        match scrutinee {
            Some(pt) => {
                if let Some((s, _)) = self.proof_term(pt, span) {
                    if !self.prop_holds(&[s.clone()], &cover) {
                        self.diag(
                            Diagnostic::error(span, "the scrutinee does not match the case guards")
                                .with_hint(format!("expected the disjunction `{}`", printer::formula(&unssa_formula(&cover)))),
                        );
                    }
                }
            }
            None if guards.contains(&Formula::True) => {}
            None => self.totality(&guards, span),
        }
        let arms: Vec<Arm<'_>> =
            cases.iter().map(|c| (Some((c.name.clone(), c.guard.clone())), c.body.as_slice())).collect();
        self.branches(&arms, merges);
    }

    /// Guards without a scrutinee must cover every state, and must still
    /// do so when each comparison is tightened by some positive margin;
    /// otherwise no program can decide which case applies.
    fn totality(&mut self, guards: &[Formula], span: Span) {
        let cover = Formula::disj(guards.to_vec());
        let hyps = self.defaults(&cover);
        let covered = self.classical("case coverage", span, hyps.clone(), &cover);
        match covered.as_ref().map(|v| &v.outcome) {
            Some(Outcome::Valid) => {}
            Some(other) => {
                let hint = match other {
                    Outcome::Counterexample(env) => format!("no case applies at {}", crate::arith::eval::env_string(env)),
                    _ => "could not show that some case always applies".into(),
                };
                self.diag(Diagnostic::error(span, "the cases do not cover every state").with_hint(hint));
                return;
            }
            None => {
                self.error(span, "cannot check that the cases cover every state");
                return;
            }
        }
        let margin = Var::new("_margin");
        let mut cands: Vec<Term> = self.margin_candidate().into_iter().map(Term::Var).collect();
        cands.push(Term::Num(Rat::new(1.into(), 1000.into())));
        for m in cands {
            let half = Term::Div(Box::new(m.clone()), Box::new(Term::num(2)));
            let tight = Formula::disj(guards.iter().map(|g| tighten(g, &Term::Var(margin.clone()))).collect());
            let tight = rename(&tight, &[(margin.clone(), half)].into_iter().collect());
            let v = self.classical("robust case coverage", span, hyps.clone(), &tight);
            if v.map(|v| v.is_valid()).unwrap_or(false) {
                return;
            }
        }
        self.diag(
            Diagnostic::error(span, "the case guards only cover every state exactly at their boundary")
                .with_hint("overlap the guards by a positive margin so a case can be chosen by comparison up to rounding"),
        );
    }

    pub(super) fn demonic_loop(&mut self, carried: &[Carried], body: &[IStmt], span: Span, inv: Option<Fact>) -> Option<Fact> {
        let Some(inv) = inv else {
            self.diag(
                Diagnostic::error(span, "a loop needs an invariant")
                    .with_hint("assert or assume the invariant immediately before the loop"),
            );
            let base = self.ctx.clone();
            self.depth += 1;
            self.block(body);
            self.depth -= 1;
            self.ctx = base;
            return None;
        };
        let to_merge: Subst = carried.iter().map(|c| (c.pre.clone(), Term::Var(c.merge.clone()))).collect();
        let to_end: Subst = carried.iter().map(|c| (c.pre.clone(), Term::Var(c.end.clone()))).collect();
        let (inv_m, raw_m) = inv.renamed(self.el, &to_merge);
        let (inv_e, _) = inv.renamed(self.el, &to_end);
        let name = inv.named.then(|| inv.name.clone());
        let base = self.ctx.clone();
        let exit = self.exit.clone();
        self.depth += 1;
        self.add_invariant(name.as_deref(), &inv, inv_m.clone(), raw_m.clone(), Origin::Assumed);
        let last = self.block(body);
        self.preserved(&inv, last, &inv_e, span);
        self.depth -= 1;
        self.ctx = base;
        self.exit = exit;
        Some(self.add_invariant(name.as_deref(), &inv, inv_m, raw_m, inv.origin))
    }

    fn add_invariant(&mut self, name: Option<&str>, inv: &Fact, fml: Formula, raw: Option<Formula>, origin: Origin) -> Fact {
        self.add_fact(name, fml, inv.status, origin);
        let last = self.ctx.last_mut().expect("fact just added");
        last.raw = raw;
        last.clone()
    }

    /// The body's final assertion must re-establish the invariant.
    fn preserved(&mut self, inv: &Fact, last: Option<Fact>, inv_end: &Formula, span: Span) {
        let shown = if inv.named { format!("`{}`", inv.name) } else { format!("`{}`", printer::formula(&unssa_formula(&inv.fml))) };
        match last {
            Some(f) if f.origin == Origin::Proved => {
                self.discharge(&format!("invariant {} after the body", shown), span, vec![f.fml], inv_end, Strategy::Auto);
            }
            _ => self.diag(
                Diagnostic::error(span, format!("the loop body must end by asserting the invariant {}", shown))
                    .with_hint("finish the body with an assertion that implies the invariant"),
            ),
        }
    }

    pub(super) fn for_loop(&mut self, f: &IFor, span: Span) -> Option<Fact> {
        self.stmt(&f.init);
        let inv = self.stmt(&f.inv)?;
        let to_merge: Subst = f.carried.iter().map(|c| (c.pre.clone(), Term::Var(c.merge.clone()))).collect();
        let to_end: Subst = f.carried.iter().map(|c| (c.pre.clone(), Term::Var(c.end.clone()))).collect();
        let (inv_m, raw_m) = inv.renamed(self.el, &to_merge);
        let (inv_e, _) = inv.renamed(self.el, &to_end);
        let name = inv.named.then(|| inv.name.clone());
        let IKind::Assume { fml: guard, .. } = &f.guard.kind else { return None };
        self.terminates(f, guard, span);
        let base = self.ctx.clone();
        self.depth += 1;
        self.add_invariant(name.as_deref(), &inv, inv_m.clone(), raw_m.clone(), Origin::Assumed);
        self.stmt(&f.guard);
        let last = self.block(&f.body);
        self.stmt(&f.update);
        self.preserved(&inv, last, &inv_e, span);
        self.depth -= 1;
        self.ctx = base;
        self.exit = Some(Exit { guard: guard.conjuncts().into_iter().cloned().collect() });
        Some(self.add_invariant(name.as_deref(), &inv, inv_m, raw_m, inv.origin))
    }

    /// Termination of a `for` loop: the update moves the index by a
    /// loop-constant amount of known sign, and a guard conjunct bounds the
    /// index in that direction by a loop-constant term.
    fn terminates(&mut self, f: &IFor, guard: &Formula, span: Span) {
        let IKind::Assign { var, rhs: Some(rhs), .. } = &f.update.kind else {
            self.error(span, "the for-loop update must assign a value to the index");
            return;
        };
        let Some(c) = f.carried.iter().find(|c| c.end == *var) else {
            self.error(span, "the for-loop update must be the last assignment to the index");
            return;
        };
        let idx = c.merge.clone();
        let constant = |v: &Var| {
            !f.carried.iter().any(|c| c.merge == *v)
                && !self.el.vars.get(v).map(|i| i.scope.contains(&Scope::Loop(f.id))).unwrap_or(false)
        };
        let step_t = Term::Sub(Box::new(rhs.clone()), Box::new(Term::Var(idx.clone())));
        let step = match normalize_poly(&step_t) {
            Ok(Some(p)) if p.vars().iter().all(constant) && !p.is_zero() => p,
            _ => {
                self.error(span, format!("the for-loop update must change `{}` by a loop-constant amount", idx.name));
                return;
            }
        };
        let step_t = step.to_term();
        let up = self.sign_known(&step_t, Cmp::Gt, span);
        let down = !up && self.sign_known(&step_t, Cmp::Lt, span);
        if !up && !down {
            self.error(span, format!("cannot show whether the for-loop increment `{}` is positive or negative", printer::term(&crate::elab::unssa_term(&step_t))));
            return;
        }
        let bounded = guard.conjuncts().into_iter().any(|g| {
            let Formula::Cmp(op, a, b) = g else { return false };
            let d = Term::Sub(Box::new(a.clone()), Box::new(b.clone()));
            let Ok(Some(p)) = normalize_poly(&d) else { return false };
            if p.degree_in(&idx) != 1 {
                return false;
            }
            let cs = p.coeffs_in(&idx);
            let Some(k) = cs[1].as_constant() else { return false };
            if !cs[0].vars().iter().all(constant) {
                return false;
            }
            let upper = match op {
                Cmp::Le | Cmp::Lt => k > Rat::zero(),
                Cmp::Ge | Cmp::Gt => k < Rat::zero(),
                Cmp::Eq => true,
                Cmp::Ne => return false,
            };
            (up && upper) || (down && (!upper || *op == Cmp::Eq))
        });
        if !bounded {
            self.error(span, format!("the for-loop guard does not bound `{}` in the direction it moves", idx.name));
        }
    }

    fn sign_known(&mut self, t: &Term, op: Cmp, span: Span) -> bool {
        let goal = Formula::cmp(op, t.clone(), Term::num(0));
        let hyps = self.defaults(&goal);
        let mut all = hyps.clone();
        all.push(goal.clone());
        let mut h = hyps;
        for d in self.closure(&all) {
            push_unique(&mut h, d);
        }
        self.cfg
            .backend
            .check(&format!("{}-{}-{}-step", self.cfg.name, span.line, span.col), &h, &goal, Strategy::Auto)
            .map(|v| v.is_valid())
            .unwrap_or(false)
    }
}

/// Strengthen a comparison by `m`, so that it also holds nearby.
fn tighten(g: &Formula, m: &Term) -> Formula {
    let add = |a: &Term| Term::Add(Box::new(a.clone()), Box::new(m.clone()));
    match g {
        Formula::Cmp(Cmp::Ge | Cmp::Gt, a, b) => Formula::cmp(Cmp::Ge, a.clone(), add(b)),
        Formula::Cmp(Cmp::Le | Cmp::Lt, a, b) => Formula::cmp(Cmp::Le, add(a), b.clone()),
        Formula::Cmp(Cmp::Ne, a, b) => Formula::or(
            Formula::cmp(Cmp::Ge, a.clone(), add(b)),
            Formula::cmp(Cmp::Le, add(a), b.clone()),
        ),
        Formula::And(a, b) => Formula::and(tighten(a, m), tighten(b, m)),
        Formula::Or(a, b) => Formula::or(tighten(a, m), tighten(b, m)),
        other => other.clone(),
    }
}

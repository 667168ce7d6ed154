//! Domain assertions of ODEs: by solution, by differential induction, and
//! the duration of angelic ODEs.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{push_unique, rename, Checker, Fact, Origin};
use crate::arith::lie::lie_derivative;
use crate::arith::poly::Poly;
use crate::arith::ratfun::normalize_poly;
use crate::arith::valid::Strategy;
use crate::ast::*;
use crate::elab::{IDom, IOde};
use crate::ode;
use crate::span::{Diagnostic, Span};
use crate::vars::Subst;

struct Flow<'o> {
    ode: &'o IOde,
    field: Option<BTreeMap<Var, Poly>>,
    solved: Option<Vec<Var>>,
    to_pre: Subst,
    /// Facts about the evolution usable by every domain assertion.
    known: Vec<Formula>,
    /// `t <= T` for angelic ODEs.
    bound: Option<Formula>,
}

impl<'a> Checker<'a> {
    pub(super) fn ode(&mut self, o: &IOde, span: Span) -> Option<Fact> {
        let info = self.el.odes[o.id].clone();
        for eq in o.eqs.iter().filter(|e| e.ghost == GhostKind::Forward) {
            if !ode::linear_in(&eq.rhs, &eq.var) {
                self.error(span, format!("the differential ghost `{}` must have a right-hand side linear in `{}`", eq.var.name, eq.var.name));
            }
            if !self.defs.contains_key(&eq.pre) && !self.ctx.iter().any(|f| f.fml.free_vars().contains(&eq.pre)) {
                self.diag(
                    Diagnostic::error(span, format!("the differential ghost `{}` has no initial value", eq.var.name))
                        .with_hint("assign it in a ghost block before the ODE"),
                );
            }
        }
        let plain: Vec<(Var, Term)> =
            o.eqs.iter().filter(|e| e.ghost != GhostKind::Inverse).map(|e| (e.var.clone(), e.rhs.clone())).collect();
        if let Some(sol) = &info.solution {
            for (x, p) in sol {
                self.define(x, Formula::cmp(Cmp::Eq, Term::Var(x.clone()), p.to_term()));
            }
        }
        self.define(&o.dur, Formula::cmp(Cmp::Ge, Term::Var(o.dur.clone()), Term::num(0)));
        let mut flow = Flow {
            ode: o,
            field: ode::field(&plain),
            solved: info.solution.as_ref().map(|s| s.keys().cloned().collect()),
            to_pre: info.pre.iter().map(|(e, p)| (e.clone(), Term::Var(p.clone()))).collect(),
            known: Vec::new(),
            bound: None,
        };
        let n_before = self.ctx.len();
        if o.angelic {
            self.angelic_duration(&mut flow, span);
        }
        let mut last = None;
        for (d, sp) in &o.dom {
            if let IDom::Assume { name, fml } = d {
                if o.angelic {
                    self.diag(
                        Diagnostic::error(*sp, "an angelic ODE cannot assume domain constraints")
                            .with_hint("the strategy chooses the duration, so every domain constraint must be asserted"),
                    );
                    continue;
                }
                self.check_mentions(fml, *sp, false);
                let st = self.status_of(fml);
                last = Some(self.add_fact(name.as_deref(), fml.clone(), st, Origin::Assumed));
                flow.known.push(fml.clone());
            }
        }
        for (d, sp) in &o.dom {
            if let IDom::Assert { name, fml, using, method } = d {
                self.check_mentions(fml, *sp, true);
                self.domain_assert(&flow, name, fml, using.as_deref(), method.as_ref(), *sp, n_before);
                let st = self.status_of(fml);
                last = Some(self.add_fact(name.as_deref(), fml.clone(), st, Origin::Proved));
                flow.known.push(fml.clone());
            }
        }
        for eq in &o.eqs {
            let Some(n) = &eq.name else { continue };
            match info.solution.as_ref().and_then(|s| s.get(&eq.var)) {
                Some(p) => {
                    let f = Formula::cmp(Cmp::Eq, Term::Var(eq.var.clone()), p.to_term());
                    let st = self.status_of(&f);
                    last = Some(self.add_fact(Some(n), f, st, Origin::Proved));
                }
                None => self.out.diagnostics.push(Diagnostic::warning(
                    span,
                    format!("`{}` names an equation without a polynomial solution; no fact is recorded", n),
                )),
            }
        }
        for (d, _) in &o.dom {
            if let IDom::Duration { name, var, rhs } = d {
                let f = Formula::cmp(Cmp::Eq, Term::Var(var.clone()), rhs.clone());
                let st = self.status_of(&f);
                last = Some(self.add_fact(name.as_deref(), f, st, Origin::Proved));
            }
        }
        last
    }

    /// An angelic duration `t := T` needs a clock `t` starting at 0 and a
    /// nonnegative `T`.
    fn angelic_duration(&mut self, flow: &mut Flow<'_>, span: Span) {
        let durs: Vec<(&Var, &Term, Span)> = flow
            .ode
            .dom
            .iter()
            .filter_map(|(d, sp)| match d {
                IDom::Duration { var, rhs, .. } => Some((var, rhs, *sp)),
                _ => None,
            })
            .collect();
        let [(var, rhs, sp)] = durs[..] else {
            self.error(span, "an angelic ODE needs exactly one duration `?(t := T)`");
            return;
        };
        let is_clock = flow.ode.eqs.iter().any(|e| {
            e.var == *var && matches!(normalize_poly(&e.rhs), Ok(Some(p)) if p == Poly::int(1))
        });
        let pre = flow.to_pre.get(var).cloned();
        let starts_at_zero = match &pre {
            Some(Term::Var(p)) => self.known_values().get(p).map(|v| v.is_zero()).unwrap_or(false),
            _ => false,
        };
        if !is_clock || !starts_at_zero {
            self.diag(
                Diagnostic::error(sp, format!("the duration must be measured by a clock: `{}` needs `{} := 0` before the ODE and `{}' = 1`", var.name, var.name, var.name)),
            );
            return;
        }
        let goal = Formula::cmp(Cmp::Ge, rhs.clone(), Term::num(0));
        let hyps = self.defaults(&goal);
        self.discharge("duration is nonnegative", sp, hyps, &goal, Strategy::Auto);
        flow.bound = Some(Formula::cmp(Cmp::Le, Term::Var(var.clone()), rhs.clone()));
    }

    #[allow(clippy::too_many_arguments)]
    fn domain_assert(
        &mut self,
        flow: &Flow<'_>,
        name: &Option<String>,
        fml: &Formula,
        using: Option<&[ProofTerm]>,
        method: Option<&Method>,
        span: Span,
        n_before: usize,
    ) {
        let label = Self::label_of(name, fml);
        let exits: Vec<&Var> = flow.ode.eqs.iter().map(|e| &e.var).collect();
        let solvable = |f: &Formula| match &flow.solved {
            Some(s) => f.free_vars().iter().filter(|v| exits.contains(v)).all(|v| s.contains(v)),
            None => false,
        };
        let selected = match using {
            None => self.defaults(fml),
            Some(items) => match self.select(items, fml, span) {
                Some(h) => h,
                None => return,
            },
        };
        let mut hyps = selected.clone();
        for k in flow.known.iter().chain(&flow.bound) {
            push_unique(&mut hyps, k.clone());
        }
        match method {
            Some(Method::Guard(_)) => self.error(span, "`by guard` does not apply inside an ODE domain"),
            Some(Method::Prop) => {
                self.discharge(&label, span, hyps, fml, Strategy::Prop);
            }
            Some(Method::Rcf) => {
                self.discharge(&label, span, hyps, fml, Strategy::Rcf);
            }
            Some(Method::Solution) if flow.solved.is_none() || !solvable(fml) => {
                self.diag(
                    Diagnostic::error(span, format!("cannot prove {} by solution: the ODE has no polynomial solution", label))
                        .with_hint("use `by induction`"),
                );
            }
            Some(Method::Solution) => {
                self.discharge(&label, span, hyps, fml, Strategy::Auto);
            }
            Some(Method::Auto) | None if solvable(fml) => {
                self.discharge(&label, span, hyps, fml, Strategy::Auto);
            }
            Some(Method::Auto) | Some(Method::Induction) | None => {
                self.induction(flow, &label, fml, hyps, using, span, n_before);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn induction(
        &mut self,
        flow: &Flow<'_>,
        label: &str,
        fml: &Formula,
        hyps: Vec<Formula>,
        using: Option<&[ProofTerm]>,
        span: Span,
        n_before: usize,
    ) {
        let Formula::Cmp(op, p, q) = fml else {
            self.diag(
                Diagnostic::error(span, format!("cannot prove {} by induction: it is not a single comparison", label))
                    .with_hint("split conjunctions into separate assertions"),
            );
            return;
        };
        if *op == Cmp::Ne {
            self.error(span, format!("cannot prove {} by induction: disequalities are not inductive", label));
            return;
        }
        let Some(field) = &flow.field else {
            self.error(span, format!("cannot prove {} by induction: the right-hand sides are not polynomial", label));
            return;
        };
        let diff = Term::Sub(Box::new(p.clone()), Box::new(q.clone()));
        let d = match normalize_poly(&diff) {
            Ok(Some(d)) => d,
            _ => {
                self.error(span, format!("cannot prove {} by induction: both sides must be polynomials", label));
                return;
            }
        };
        let base_goal = rename(fml, &flow.to_pre);
        let outer: Vec<super::Fact> = self.ctx[..n_before].to_vec();
        let saved = std::mem::replace(&mut self.ctx, outer);
        let base_hyps = match using {
            None => Some(self.defaults(&base_goal)),
            Some(items) => self.select(items, &base_goal, span),
        };
        self.ctx = saved;
        let Some(mut base_hyps) = base_hyps else { return };
        for k in &flow.known {
            push_unique(&mut base_hyps, rename(k, &flow.to_pre));
        }
        self.discharge(&format!("{} (initially)", label), span, base_hyps, &base_goal, Strategy::Auto);
        let lie = lie_derivative(&d, field).to_term();
        let step_op = match op {
            Cmp::Eq => Cmp::Eq,
            Cmp::Ge | Cmp::Gt => Cmp::Ge,
            Cmp::Le | Cmp::Lt => Cmp::Le,
            Cmp::Ne => unreachable!(),
        };
        let step = Formula::cmp(step_op, lie, Term::num(0));
        self.discharge(&format!("{} (derivative)", label), span, hyps, &step, Strategy::Auto);
    }
}

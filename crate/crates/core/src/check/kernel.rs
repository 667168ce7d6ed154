//! Natural-deduction proof terms for `note` and `using` lists.

use super::{Checker, Status};
use crate::ast::{Formula, GhostKind, ProofTerm};
use crate::elab::unssa_formula;
use crate::printer;
use crate::span::Span;

fn show(f: &Formula) -> String {
    printer::formula(&unssa_formula(f))
}

impl<'a> Checker<'a> {
    /// The formula a proof term proves and the status it inherits.
    pub(super) fn proof_term(&mut self, pt: &ProofTerm, span: Span) -> Option<(Formula, Status)> {
        match pt {
            ProofTerm::Fact(n) => {
                let Some(f) = self.lookup(n).cloned() else {
                    self.error(span, format!("unknown fact `{}`", n));
                    return None;
                };
                if f.status == Status::Inverse && self.mode != GhostKind::Inverse {
                    self.error(span, format!("fact `{}` was established in an inverse ghost and can only be used inside one", n));
                    return None;
                }
                Some((f.fml, f.status))
            }
            ProofTerm::Ellipsis => {
                self.error(span, "`...` can only appear in a `using` list");
                None
            }
            ProofTerm::Rule(rule, args) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.proof_term(a, span)?);
                }
                let st = vals.iter().map(|(_, s)| *s).max().unwrap_or(Status::Plain);
                let f = self.rule(rule, vals.into_iter().map(|(f, _)| f).collect(), span)?;
                Some((f, st))
            }
        }
    }

    fn rule(&mut self, rule: &str, args: Vec<Formula>, span: Span) -> Option<Formula> {
        let arity = match rule {
            "andI" | "orIL" | "orIR" | "implyE" | "notE" => 2,
            "andEL" | "andER" | "iffEL" | "iffER" => 1,
            _ => {
                self.error(span, format!("unknown proof rule `{}`", rule));
                return None;
            }
        };
        if args.len() != arity {
            self.error(span, format!("`{}` takes {} argument(s), got {}", rule, arity, args.len()));
            return None;
        }
        let mut it = args.into_iter();
        let a = it.next().unwrap();
        let b = it.next();
        let bad = |me: &mut Self, what: &str, f: &Formula| {
            me.error(span, format!("`{}` expects {}, got `{}`", rule, what, show(f)));
            None
        };
        match rule {
            "andI" => Some(Formula::And(Box::new(a), Box::new(b.unwrap()))),
            // the second argument only contributes its statement
            "orIL" => Some(Formula::Or(Box::new(a), Box::new(b.unwrap()))),
            "orIR" => Some(Formula::Or(Box::new(b.unwrap()), Box::new(a))),
            "andEL" | "andER" => match a {
                Formula::And(l, r) => Some(if rule == "andEL" { *l } else { *r }),
                other => bad(self, "a conjunction", &other),
            },
            "iffEL" | "iffER" => match a {
                Formula::Iff(l, r) => Some(if rule == "iffEL" {
                    Formula::Imply(l, r)
                } else {
                    Formula::Imply(r, l)
                }),
                other => bad(self, "an equivalence", &other),
            },
            "implyE" => {
                let arg = b.unwrap();
                match a {
                    Formula::Imply(l, r) if *l == arg || self.prop_holds(&[arg.clone()], &l) => Some(*r),
                    Formula::Imply(l, _) => {
                        self.error(span, format!("`implyE` needs `{}`, got `{}`", show(&l), show(&arg)));
                        None
                    }
                    other => bad(self, "an implication", &other),
                }
            }
            "notE" => {
                let arg = b.unwrap();
                let neg = match a {
                    Formula::Not(p) => *p,
                    Formula::Imply(p, f) if *f == Formula::False => *p,
                    other => return bad(self, "a negation", &other),
                };
                if neg == arg || self.prop_holds(&[arg.clone()], &neg) {
                    Some(Formula::False)
                } else {
                    self.error(span, format!("`notE` needs `{}`, got `{}`", show(&neg), show(&arg)));
                    None
                }
            }
            _ => unreachable!(),
        }
    }
}

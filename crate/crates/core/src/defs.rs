//! `let` definitions and their expansion at use sites.

use std::collections::BTreeMap;

use crate::ast::{Def, Formula, Game, Term, Var};
use crate::vars::Subst;

/// Names beginning with `@` stand for located expressions that the
/// elaborator has already lifted out; they are never expanded.
pub fn is_placeholder(name: &str) -> bool {
    name.starts_with('@')
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DefError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("`{0}` is defined recursively")]
    Recursive(String),
}

/// Definitions visible at a program point. Bodies are stored already
/// expanded, so expansion at a use site is a single substitution.
#[derive(Clone, Debug, Default)]
pub struct Defs {
    map: BTreeMap<String, Def>,
}

fn params_subst(params: &[String], args: &[Term]) -> Subst {
    params.iter().zip(args).map(|(p, a)| (Var::new(p.clone()), a.clone())).collect()
}

impl Defs {
    pub fn get(&self, name: &str) -> Option<&Def> {
        self.map.get(name)
    }

    /// Expand the body against earlier definitions and register it.
    pub fn define(&mut self, def: Def) -> Result<Def, DefError> {
        let name = def.name().to_string();
        let mut inner = self.clone();
        inner.map.remove(&name);
        let refers_to_self = |e: &DefError| match e {
            DefError::UnknownFunction(n) | DefError::UnknownPredicate(n) | DefError::UnknownGame(n) => *n == name,
            _ => false,
        };
        let expanded = (|| -> Result<Def, DefError> {
            Ok(match def {
                Def::Term { name: n, params, body } => Def::Term { name: n, params, body: inner.term(&body)? },
                Def::Formula { name: n, params, body } => Def::Formula { name: n, params, body: inner.formula(&body)? },
                Def::Game { name: n, body } => Def::Game { name: n, body: inner.game(&body)? },
            })
        })()
        .map_err(|e| if refers_to_self(&e) { DefError::Recursive(name.clone()) } else { e })?;
        self.map.insert(name, expanded.clone());
        Ok(expanded)
    }

    pub fn term(&self, t: &Term) -> Result<Term, DefError> {
        let bx = |t: Term| Box::new(t);
        Ok(match t {
            Term::Num(_) | Term::Var(_) => t.clone(),
            Term::Neg(a) => Term::Neg(bx(self.term(a)?)),
            Term::Pow(a, e) => Term::Pow(bx(self.term(a)?), e.clone()),
            Term::Add(a, b) => Term::Add(bx(self.term(a)?), bx(self.term(b)?)),
            Term::Sub(a, b) => Term::Sub(bx(self.term(a)?), bx(self.term(b)?)),
            Term::Mul(a, b) => Term::Mul(bx(self.term(a)?), bx(self.term(b)?)),
            Term::Div(a, b) => Term::Div(bx(self.term(a)?), bx(self.term(b)?)),
            Term::Min(a, b) => Term::Min(bx(self.term(a)?), bx(self.term(b)?)),
            Term::Max(a, b) => Term::Max(bx(self.term(a)?), bx(self.term(b)?)),
            Term::App(f, args) if is_placeholder(f) => Term::App(f.clone(), args.clone()),
            Term::App(f, args) => {
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                match self.map.get(f) {
                    Some(Def::Term { params, body, .. }) => {
                        if params.len() != args.len() {
                            return Err(DefError::Arity { name: f.clone(), expected: params.len(), got: args.len() });
                        }
                        body.subst(&params_subst(params, &args))
                    }
                    _ => return Err(DefError::UnknownFunction(f.clone())),
                }
            }
            Term::At(e, loc) => {
                let mut loc = loc.clone();
                loc.args = loc.args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Term::At(bx(self.term(e)?), loc)
            }
        })
    }

    pub fn formula(&self, f: &Formula) -> Result<Formula, DefError> {
        let bx = |f: Formula| Box::new(f);
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, self.term(a)?, self.term(b)?),
            Formula::Not(a) => Formula::Not(bx(self.formula(a)?)),
            Formula::And(a, b) => Formula::And(bx(self.formula(a)?), bx(self.formula(b)?)),
            Formula::Or(a, b) => Formula::Or(bx(self.formula(a)?), bx(self.formula(b)?)),
            Formula::Imply(a, b) => Formula::Imply(bx(self.formula(a)?), bx(self.formula(b)?)),
            Formula::Iff(a, b) => Formula::Iff(bx(self.formula(a)?), bx(self.formula(b)?)),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), bx(self.formula(a)?)),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), bx(self.formula(a)?)),
            Formula::Box(g, p) => Formula::Box(Box::new(self.game(g)?), bx(self.formula(p)?)),
            Formula::Diamond(g, p) => Formula::Diamond(Box::new(self.game(g)?), bx(self.formula(p)?)),
            Formula::Pred(p, args) if is_placeholder(p) => Formula::Pred(p.clone(), args.clone()),
            Formula::Pred(p, args) => {
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                match self.map.get(p) {
                    Some(Def::Formula { params, body, .. }) => {
                        if params.len() != args.len() {
                            return Err(DefError::Arity { name: p.clone(), expected: params.len(), got: args.len() });
                        }
                        // bodies are quantifier-free in practice; fall back to the
                        // unexpanded call if substitution would capture
                        body.subst(&params_subst(params, &args)).unwrap_or_else(|_| f.clone())
                    }
                    _ => return Err(DefError::UnknownPredicate(p.clone())),
                }
            }
            Formula::At(e, loc) => {
                let mut loc = loc.clone();
                loc.args = loc.args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Formula::At(bx(self.formula(e)?), loc)
            }
        })
    }

    pub fn game(&self, g: &Game) -> Result<Game, DefError> {
        Ok(match g {
            Game::Assign(x, t) => Game::Assign(x.clone(), self.term(t)?),
            Game::Random(_) => g.clone(),
            Game::Ode(eqs, dom) => Game::Ode(
                eqs.iter().map(|(x, t)| Ok((x.clone(), self.term(t)?))).collect::<Result<_, DefError>>()?,
                self.formula(dom)?,
            ),
            Game::Test(f) => Game::Test(self.formula(f)?),
            Game::Seq(gs) => Game::Seq(gs.iter().map(|g| self.game(g)).collect::<Result<_, _>>()?),
            Game::Choice(a, b) => Game::Choice(Box::new(self.game(a)?), Box::new(self.game(b)?)),
            Game::Repeat(a) => Game::Repeat(Box::new(self.game(a)?)),
            Game::Dual(a) => Game::Dual(Box::new(self.game(a)?)),
            Game::Call(n) => match self.map.get(n) {
                Some(Def::Game { body, .. }) => body.clone(),
                _ => return Err(DefError::UnknownGame(n.clone())),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_document, parse_formula, parse_term};
    use crate::ast::StmtKind;

    fn defs(src: &str) -> Result<Defs, DefError> {
        let doc = parse_document(src).unwrap();
        let mut d = Defs::default();
        for s in doc.stmts {
            if let StmtKind::Let(def) = s.kind {
                d.define(def)?;
            }
        }
        Ok(d)
    }

    #[test]
    fn nested_expansion() {
        let d = defs("let SB() = v^2/(2*B); let safe() <-> (SB() <= (d-x));").unwrap();
        let f = d.formula(&parse_formula("safe()").unwrap()).unwrap();
        assert_eq!(f, parse_formula("v^2/(2*B) <= d - x").unwrap());
    }

    #[test]
    fn parameters_substitute_simultaneously() {
        let d = defs("let sol(x) = x*(x+1)/2;").unwrap();
        let t = d.term(&parse_term("sol(x+1)").unwrap()).unwrap();
        assert_eq!(t, parse_term("(x+1)*((x+1)+1)/2").unwrap());
    }

    #[test]
    fn errors() {
        let d = defs("let f(x) = x;").unwrap();
        assert!(matches!(d.term(&parse_term("f(1, 2)").unwrap()), Err(DefError::Arity { .. })));
        assert!(matches!(d.term(&parse_term("g(1)").unwrap()), Err(DefError::UnknownFunction(_))));
        assert!(matches!(defs("let f(x) = f(x) + 1;"), Err(DefError::Recursive(_))));
    }
}

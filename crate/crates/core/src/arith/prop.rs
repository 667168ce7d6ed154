//! Intuitionistic propositional proving (contraction-free sequent calculus)
//! and the hereditary Harrop polarity check.

use std::collections::BTreeMap;

use num_traits::Signed;

use super::poly::Poly;
use super::ratfun::{leading, normalize};
use crate::ast::{Cmp, Formula, Rat, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum P {
    Atom(usize),
    Bot,
    Top,
    And(Box<P>, Box<P>),
    Or(Box<P>, Box<P>),
    Imp(Box<P>, Box<P>),
}

fn imp(a: P, b: P) -> P {
    P::Imp(Box::new(a), Box::new(b))
}

/// Key identifying arithmetic atoms up to normalization, so `y = 1` and
/// `1 = y` or `x < y` and `y > x` are the same proposition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum AtomKey {
    Arith(Cmp, Poly),
    Other(String),
}

/// Normalizing huge powers or quotients is not worth it for atom matching.
fn cheap(t: &Term) -> bool {
    match t {
        Term::Num(_) | Term::Var(_) => true,
        Term::Neg(a) => cheap(a),
        Term::Pow(a, e) => *e <= Rat::from_integer(4.into()) && cheap(a),
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => cheap(a) && cheap(b),
        _ => false,
    }
}

fn atom_key(f: &Formula) -> AtomKey {
    if let Formula::Cmp(op, a, b) = f {
        if !cheap(a) || !cheap(b) {
            return AtomKey::Other(format!("{:?}", f));
        }
        let (op, l, r) = match op {
            Cmp::Le | Cmp::Lt => (op.flip(), b, a),
            _ => (*op, a, b),
        };
        let diff = Term::Sub(Box::new(l.clone()), Box::new(r.clone()));
        if let Ok(rf) = normalize(&diff) {
            if rf.is_poly() {
                let p = rf.num;
                let key = match leading(&p) {
                    None => p,
                    Some((_, c)) => {
                        let k: Rat = if matches!(op, Cmp::Eq | Cmp::Ne) { c.recip() } else { c.abs().recip() };
                        p.scale(&k)
                    }
                };
                return AtomKey::Arith(op, key);
            }
        }
    }
    AtomKey::Other(format!("{:?}", f))
}

#[derive(Default)]
struct Interner {
    atoms: BTreeMap<AtomKey, usize>,
}

impl Interner {
    fn conv(&mut self, f: &Formula) -> P {
        match f {
            Formula::True => P::Top,
            Formula::False => P::Bot,
            Formula::Not(a) => imp(self.conv(a), P::Bot),
            Formula::And(a, b) => P::And(Box::new(self.conv(a)), Box::new(self.conv(b))),
            Formula::Or(a, b) => P::Or(Box::new(self.conv(a)), Box::new(self.conv(b))),
            Formula::Imply(a, b) => imp(self.conv(a), self.conv(b)),
            Formula::Iff(a, b) => {
                let (x, y) = (self.conv(a), self.conv(b));
                P::And(Box::new(imp(x.clone(), y.clone())), Box::new(imp(y, x)))
            }
            other => {
                let key = atom_key(other);
                let n = self.atoms.len();
                P::Atom(*self.atoms.entry(key).or_insert(n))
            }
        }
    }
}

/// Intuitionistic propositional provability of `hyps ⊢ goal`, with
/// non-propositional subformulas as atoms.
pub fn prove(hyps: &[Formula], goal: &Formula) -> bool {
    let mut i = Interner::default();
    let ctx: Vec<P> = hyps.iter().map(|h| i.conv(h)).collect();
    let g = i.conv(goal);
    let mut fuel = 200_000usize;
    g4(ctx, g, &mut fuel)
}

fn g4(mut ctx: Vec<P>, goal: P, fuel: &mut usize) -> bool {
    if *fuel == 0 {
        return false;
    }
    *fuel -= 1;
    // invertible left rules
    let mut i = 0;
    while i < ctx.len() {
        let f = ctx[i].clone();
        let replace: Option<Vec<P>> = match &f {
            P::Bot => return true,
            P::Top => Some(vec![]),
            P::And(a, b) => Some(vec![(**a).clone(), (**b).clone()]),
            P::Or(a, b) => {
                ctx.remove(i);
                let mut c1 = ctx.clone();
                c1.push((**a).clone());
                let mut c2 = ctx;
                c2.push((**b).clone());
                return g4(c1, goal.clone(), fuel) && g4(c2, goal, fuel);
            }
            P::Imp(a, c) => match &**a {
                P::Top => Some(vec![(**c).clone()]),
                P::Bot => Some(vec![]),
                P::And(x, y) => Some(vec![imp((**x).clone(), imp((**y).clone(), (**c).clone()))]),
                P::Or(x, y) => Some(vec![imp((**x).clone(), (**c).clone()), imp((**y).clone(), (**c).clone())]),
                P::Atom(_) if ctx.contains(a) => Some(vec![(**c).clone()]),
                _ => None,
            },
            P::Atom(_) => None,
        };
        match replace {
            Some(new) => {
                ctx.remove(i);
                for n in new {
                    if !ctx.contains(&n) {
                        ctx.push(n);
                    }
                }
                i = 0;
            }
            None => i += 1,
        }
    }
    // atom -> C where the atom arrived later
    loop {
        let hit = ctx.iter().position(|f| matches!(f, P::Imp(a, _) if matches!(**a, P::Atom(_)) && ctx.contains(a)));
        match hit {
            Some(k) => {
                let P::Imp(_, c) = ctx.remove(k) else { unreachable!() };
                return g4_push(ctx, *c, goal, fuel);
            }
            None => break,
        }
    }
    // invertible right rules
    match &goal {
        P::Top => return true,
        P::And(a, b) => return g4(ctx.clone(), (**a).clone(), fuel) && g4(ctx, (**b).clone(), fuel),
        P::Imp(a, b) => return g4_push(ctx, (**a).clone(), (**b).clone(), fuel),
        _ => {}
    }
    if ctx.contains(&goal) {
        return true;
    }
    if let P::Or(a, b) = &goal {
        if g4(ctx.clone(), (**a).clone(), fuel) || g4(ctx.clone(), (**b).clone(), fuel) {
            return true;
        }
    }
    // (A -> B) -> C
    for k in 0..ctx.len() {
        if let P::Imp(ab, c) = &ctx[k] {
            if let P::Imp(_, b) = &**ab {
                let mut rest = ctx.clone();
                rest.remove(k);
                let mut left = rest.clone();
                left.push(imp((**b).clone(), (**c).clone()));
                if g4(left, (**ab).clone(), fuel) && g4_push(rest, (**c).clone(), goal.clone(), fuel) {
                    return true;
                }
            }
        }
    }
    false
}

fn g4_push(mut ctx: Vec<P>, h: P, goal: P, fuel: &mut usize) -> bool {
    if !ctx.contains(&h) {
        ctx.push(h);
    }
    g4(ctx, goal, fuel)
}

/// True iff disjunctions and existentials occur only in assumption
/// positions. Polarity flips left of an implication and under negation.
pub fn is_harrop(f: &Formula) -> bool {
    harrop(f, true)
}

fn harrop(f: &Formula, positive: bool) -> bool {
    match f {
        Formula::Or(a, b) => !positive && harrop(a, positive) && harrop(b, positive),
        Formula::Exists(_, a) => !positive && harrop(a, positive),
        Formula::And(a, b) => harrop(a, positive) && harrop(b, positive),
        Formula::Imply(a, b) => harrop(a, !positive) && harrop(b, positive),
        Formula::Not(a) => harrop(a, !positive),
        Formula::Iff(a, b) => harrop(a, true) && harrop(a, false) && harrop(b, true) && harrop(b, false),
        Formula::Forall(_, a) => harrop(a, positive),
        Formula::At(a, _) => harrop(a, positive),
        _ => true,
    }
}

/// Harrop check for the sequent `hyps ⊢ concl`.
pub fn sequent_is_harrop(hyps: &[Formula], concl: &Formula) -> bool {
    hyps.iter().all(|h| harrop(h, false)) && harrop(concl, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn modus_ponens_through_arithmetic_atoms() {
        let a = f("x = 0 -> y = 1");
        let b = f("x = 0 & (z - x*w^2/(w^2+1))^42 >= 6");
        assert!(prove(&[a, b], &f("y = 1")));
    }

    #[test]
    fn atoms_match_up_to_orientation() {
        assert!(prove(&[f("x < y")], &f("y > x")));
        assert!(prove(&[f("1 = y")], &f("y = 1")));
    }

    #[test]
    fn excluded_middle_is_not_intuitionistic() {
        assert!(!prove(&[], &f("p = 0 | !(p = 0)")));
        assert!(prove(&[], &f("!!(p = 0 | !(p = 0))")));
    }

    #[test]
    fn nested_implication_rule() {
        assert!(prove(&[f("(a = 0 -> b = 0) -> c = 0"), f("b = 0")], &f("c = 0")));
    }

    #[test]
    fn harrop_polarity() {
        assert!(is_harrop(&f("(x = 0 | x = 1) -> y >= 0")));
        assert!(!is_harrop(&f("x >= 0 | x < 1")));
        // (phi -> psi) -> rho: psi is an assumption, phi is not
        assert!(is_harrop(&f("(a = 0 -> (b = 0 | c = 0)) -> d = 0")));
        assert!(!is_harrop(&f("((b = 0 | c = 0) -> a = 0) -> d = 0")));
    }
}

//! Term and formula expressions, parsed together by precedence climbing and
//! sorted into terms or formulas as operators demand.

use num_traits::Zero;

use super::{PResult, Parser};
use crate::ast::*;
use crate::lexer::Tok;
use crate::span::Diagnostic;

const P_EQUIV: u8 = 1;
const P_IMPLY: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_NOT: u8 = 5;
const P_CMP: u8 = 6;
const P_ADD: u8 = 7;
const P_MUL: u8 = 8;
const P_NEG: u8 = 9;
const P_POW: u8 = 10;

/// An expression whose sort is not yet known. A bare application `f(x)` is a
/// term or a predicate depending on where it ends up.
#[derive(Debug, Clone)]
enum PExpr {
    T(Term),
    F(Formula),
    App(String, Vec<Term>, Option<Located>),
}

impl Parser {
    pub(super) fn formula(&mut self) -> PResult<Formula> {
        let min = if self.in_domain { P_NOT } else { 0 };
        let e = self.expr(min)?;
        self.to_formula(e)
    }

    pub(super) fn term(&mut self) -> PResult<Term> {
        let e = self.expr(P_ADD)?;
        self.to_term(e)
    }

    /// Either sort, preferring a formula when the text is ambiguous.
    pub(super) fn expr_any(&mut self) -> PResult<Expr> {
        Ok(match self.expr(0)? {
            PExpr::T(t) => Expr::Term(t),
            PExpr::F(f) => Expr::Formula(f),
            PExpr::App(n, a, l) => Expr::Formula(pred(n, a, l)),
        })
    }

    fn to_term(&self, e: PExpr) -> PResult<Term> {
        match e {
            PExpr::T(t) => Ok(t),
            PExpr::App(n, a, l) => Ok(app(n, a, l)),
            PExpr::F(_) => Err(Diagnostic::error(self.prev_span(), "expected a term but found a formula")),
        }
    }

    fn to_formula(&self, e: PExpr) -> PResult<Formula> {
        match e {
            PExpr::F(f) => Ok(f),
            PExpr::App(n, a, l) => Ok(pred(n, a, l)),
            PExpr::T(_) => Err(Diagnostic::error(self.prev_span(), "expected a formula but found a term")),
        }
    }

    fn expr(&mut self, min: u8) -> PResult<PExpr> {
        let mut lhs = self.prefix(min)?;
        loop {
            let (prec, right) = match self.peek() {
                Tok::Equiv => (P_EQUIV, true),
                Tok::Arrow => (P_IMPLY, true),
                Tok::Bar => (P_OR, false),
                Tok::Amp => (P_AND, false),
                Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge => (P_CMP, false),
                Tok::Plus | Tok::Minus => (P_ADD, false),
                Tok::Star | Tok::Slash => (P_MUL, false),
                Tok::Caret if !matches!(self.peek_at(1), Tok::At) => (P_POW, true),
                _ => break,
            };
            if prec < min {
                break;
            }
            let op = self.bump();
            if op == Tok::Caret {
                let exp = self.exponent()?;
                let base = self.to_term(lhs)?;
                lhs = PExpr::T(Term::Pow(Box::new(base), exp));
                continue;
            }
            let next = if right { prec } else { prec + 1 };
            let rhs = self.expr(next)?;
            lhs = self.combine(op, lhs, rhs)?;
            if prec == P_CMP && matches!(self.peek(), Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge) {
                return Err(Diagnostic::error(self.span(), "comparisons do not chain; use `&`"));
            }
        }
        Ok(lhs)
    }

    fn combine(&self, op: Tok, l: PExpr, r: PExpr) -> PResult<PExpr> {
        fn b<T>(x: T) -> Box<T> {
            Box::new(x)
        }
        Ok(match op {
            Tok::Equiv => PExpr::F(Formula::Iff(b(self.to_formula(l)?), b(self.to_formula(r)?))),
            Tok::Arrow => PExpr::F(Formula::Imply(b(self.to_formula(l)?), b(self.to_formula(r)?))),
            Tok::Bar => PExpr::F(Formula::Or(b(self.to_formula(l)?), b(self.to_formula(r)?))),
            Tok::Amp => PExpr::F(Formula::And(b(self.to_formula(l)?), b(self.to_formula(r)?))),
            Tok::Plus => PExpr::T(Term::Add(b(self.to_term(l)?), b(self.to_term(r)?))),
            Tok::Minus => PExpr::T(Term::Sub(b(self.to_term(l)?), b(self.to_term(r)?))),
            Tok::Star => PExpr::T(Term::Mul(b(self.to_term(l)?), b(self.to_term(r)?))),
            Tok::Slash => match (self.to_term(l)?, self.to_term(r)?) {
                // literal fractions are numbers
                (Term::Num(p), Term::Num(q)) if !q.is_zero() => PExpr::T(Term::Num(p / q)),
                (a, c) => PExpr::T(Term::Div(b(a), b(c))),
            },
            cmp => {
                let c = match cmp {
                    Tok::Eq => Cmp::Eq,
                    Tok::Ne => Cmp::Ne,
                    Tok::Lt => Cmp::Lt,
                    Tok::Le => Cmp::Le,
                    Tok::Gt => Cmp::Gt,
                    _ => Cmp::Ge,
                };
                PExpr::F(Formula::Cmp(c, self.to_term(l)?, self.to_term(r)?))
            }
        })
    }

    /// Exponents must fold to a rational constant.
    fn exponent(&mut self) -> PResult<Rat> {
        let sp = self.span();
        let e = self.expr(P_NEG)?;
        let t = self.to_term(e)?;
        const_fold(&t).ok_or_else(|| Diagnostic::error(sp, "exponent must be a constant"))
    }

    fn prefix(&mut self, _min: u8) -> PResult<PExpr> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                let e = self.expr(P_NOT)?;
                Ok(PExpr::F(Formula::Not(Box::new(self.to_formula(e)?))))
            }
            Tok::Minus => {
                self.bump();
                let literal = matches!(self.peek(), Tok::Num(_));
                let e = self.expr(P_NEG)?;
                let t = self.to_term(e)?;
                Ok(PExpr::T(match t {
                    Term::Num(n) if literal => Term::Num(-n),
                    t => Term::Neg(Box::new(t)),
                }))
            }
            Tok::LBrack => {
                self.bump();
                let g = self.game()?;
                self.expect(&Tok::RBrack)?;
                let e = self.expr(P_NOT)?;
                Ok(PExpr::F(Formula::Box(Box::new(g), Box::new(self.to_formula(e)?))))
            }
            Tok::Lt => {
                self.bump();
                let g = self.game()?;
                self.expect(&Tok::Gt)?;
                let e = self.expr(P_NOT)?;
                Ok(PExpr::F(Formula::Diamond(Box::new(g), Box::new(self.to_formula(e)?))))
            }
            _ => {
                let a = self.atom()?;
                self.postfix(a)
            }
        }
    }

    fn postfix(&mut self, mut e: PExpr) -> PResult<PExpr> {
        while self.at(&Tok::At) {
            self.bump();
            let label = self.ident()?;
            let mut args = Vec::new();
            if self.eat(&Tok::LParen) {
                args = self.term_list(&Tok::RParen)?;
            }
            let loc = Located { label, args };
            e = match e {
                PExpr::T(t) => PExpr::T(Term::At(Box::new(t), loc)),
                PExpr::F(f) => PExpr::F(Formula::At(Box::new(f), loc)),
                PExpr::App(n, a, None) => PExpr::App(n, a, Some(loc)),
                PExpr::App(n, a, Some(l0)) => PExpr::T(Term::At(Box::new(app(n, a, Some(l0))), loc)),
            };
        }
        Ok(e)
    }

    pub(super) fn term_list(&mut self, close: &Tok) -> PResult<Vec<Term>> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    fn atom(&mut self) -> PResult<PExpr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(PExpr::T(Term::Num(n)))
            }
            Tok::LParen => {
                self.bump();
                let outer = std::mem::replace(&mut self.in_domain, false);
                let e = self.expr(0);
                self.in_domain = outer;
                let e = e?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(PExpr::F(Formula::True))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(PExpr::F(Formula::False))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::LParen) {
                    let args = self.term_list(&Tok::RParen)?;
                    if name == "min" || name == "max" {
                        if args.len() != 2 {
                            return Err(Diagnostic::error(self.prev_span(), format!("`{}` takes two arguments", name)));
                        }
                        let mut it = args.into_iter();
                        let (a, b) = (Box::new(it.next().unwrap()), Box::new(it.next().unwrap()));
                        return Ok(PExpr::T(if name == "min" { Term::Min(a, b) } else { Term::Max(a, b) }));
                    }
                    return Ok(PExpr::App(name, args, None));
                }
                Ok(PExpr::T(Term::Var(Var::new(name))))
            }
            _ => Err(self.error_expected("expression")),
        }
    }
}

fn app(n: String, a: Vec<Term>, l: Option<Located>) -> Term {
    let t = Term::App(n, a);
    match l {
        None => t,
        Some(l) => Term::At(Box::new(t), l),
    }
}

fn pred(n: String, a: Vec<Term>, l: Option<Located>) -> Formula {
    let f = Formula::Pred(n, a);
    match l {
        None => f,
        Some(l) => Formula::At(Box::new(f), l),
    }
}

/// Evaluate a variable-free term built from numbers and field operations.
pub fn const_fold(t: &Term) -> Option<Rat> {
    Some(match t {
        Term::Num(n) => n.clone(),
        Term::Neg(a) => -const_fold(a)?,
        Term::Add(a, b) => const_fold(a)? + const_fold(b)?,
        Term::Sub(a, b) => const_fold(a)? - const_fold(b)?,
        Term::Mul(a, b) => const_fold(a)? * const_fold(b)?,
        Term::Div(a, b) => {
            let d = const_fold(b)?;
            if d.is_zero() {
                return None;
            }
            const_fold(a)? / d
        }
        Term::Pow(a, e) if e.is_integer() => {
            let base = const_fold(a)?;
            let k = e.to_integer();
            let k: i32 = k.try_into().ok()?;
            if k < 0 && base.is_zero() {
                return None;
            }
            num_traits::pow::Pow::pow(&base, k)
        }
        _ => return None,
    })
}

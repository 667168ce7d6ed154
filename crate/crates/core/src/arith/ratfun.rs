//! Normal forms of terms as quotients of polynomials.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::poly::{Mono, Poly};
use crate::ast::{Rat, Term, Var};
use crate::printer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("non-integer exponent in `{0}`")]
    RationalExponent(String),
    #[error("unexpanded function application `{0}`")]
    Application(String),
    #[error("unresolved located expression `{0}`")]
    Located(String),
    #[error("min/max must be case-split before normalization: `{0}`")]
    MinMax(String),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFun {
    pub num: Poly,
    pub den: Poly,
}

impl RatFun {
    pub fn poly(p: Poly) -> RatFun {
        RatFun { num: p, den: Poly::int(1) }
    }

    pub fn is_poly(&self) -> bool {
        self.den.as_constant().is_some_and(|c| c.is_one())
    }

    fn make(num: Poly, den: Poly) -> RatFun {
        if num.is_zero() {
            return RatFun::poly(Poly::zero());
        }
        if let Some(c) = den.as_constant() {
            return RatFun::poly(num.scale(&(Rat::one() / c)));
        }
        if let Some(q) = div_exact(&num, &den) {
            return RatFun::poly(q);
        }
        // keep the denominator's leading coefficient at 1
        let (_, lc) = leading(&den).expect("nonzero denominator");
        let inv = Rat::one() / lc;
        RatFun { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        if self.den == o.den {
            return RatFun::make(&self.num + &o.num, self.den.clone());
        }
        RatFun::make(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        RatFun::make(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &RatFun) -> Option<RatFun> {
        if o.num.is_zero() {
            return None;
        }
        Some(RatFun::make(&self.num * &o.den, &self.den * &o.num))
    }

    pub fn pow(&self, n: u32) -> RatFun {
        RatFun::make(self.num.pow(n), self.den.pow(n))
    }
}

/// Graded lexicographic comparison, a monomial order.
pub fn grlex(a: &Mono, b: &Mono) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        let mut vars: Vec<&Var> = a.vars().chain(b.vars()).collect();
        vars.sort();
        vars.dedup();
        for x in vars {
            match a.exp(x).cmp(&b.exp(x)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

pub fn leading(p: &Poly) -> Option<(Mono, Rat)> {
    p.terms.iter().max_by(|a, b| grlex(a.0, b.0)).map(|(m, c)| (m.clone(), c.clone()))
}

/// `p / q` when `q` divides `p` exactly.
pub fn div_exact(p: &Poly, q: &Poly) -> Option<Poly> {
    let (lm, lc) = leading(q)?;
    let mut rem = p.clone();
    let mut quot = Poly::zero();
    let mut steps = 0;
    while !rem.is_zero() {
        steps += 1;
        if steps > 10_000 {
            return None;
        }
        let (rm, rc) = leading(&rem).unwrap();
        let m = rm.div(&lm)?;
        let c = rc / &lc;
        let t = Poly::mono(m.clone(), c.clone());
        quot = &quot + &t;
        rem = &rem - &q.mul_mono(&m, &c);
    }
    Some(quot)
}

pub fn normalize(t: &Term) -> Result<RatFun, NormError> {
    Ok(match t {
        Term::Num(r) => RatFun::poly(Poly::constant(r.clone())),
        Term::Var(x) => RatFun::poly(Poly::var(x.clone())),
        Term::Neg(a) => normalize(a)?.neg(),
        Term::Add(a, b) => normalize(a)?.add(&normalize(b)?),
        Term::Sub(a, b) => normalize(a)?.sub(&normalize(b)?),
        Term::Mul(a, b) => normalize(a)?.mul(&normalize(b)?),
        Term::Div(a, b) => {
            let d = normalize(b)?;
            normalize(a)?.div(&d).ok_or_else(|| NormError::DivisionByZero(printer::term(t)))?
        }
        Term::Pow(a, e) => {
            if !e.is_integer() {
                return Err(NormError::RationalExponent(printer::term(t)));
            }
            let base = normalize(a)?;
            let k: i64 = e.to_integer().try_into().map_err(|_| NormError::RationalExponent(printer::term(t)))?;
            if k >= 0 {
                base.pow(k as u32)
            } else {
                RatFun::poly(Poly::int(1))
                    .div(&base.pow((-k) as u32))
                    .ok_or_else(|| NormError::DivisionByZero(printer::term(t)))?
            }
        }
        Term::Min(..) | Term::Max(..) => return Err(NormError::MinMax(printer::term(t))),
        Term::App(..) => return Err(NormError::Application(printer::term(t))),
        Term::At(..) => return Err(NormError::Located(printer::term(t))),
    })
}

/// Polynomial normal form; fails if a non-constant denominator remains.
pub fn normalize_poly(t: &Term) -> Result<Option<Poly>, NormError> {
    let r = normalize(t)?;
    Ok(if r.is_poly() { Some(r.num) } else { None })
}

/// Divisors occurring in `t`, for nonzero-denominator obligations. Constant
/// divisors other than zero are skipped.
pub fn divisors(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Num(_) | Term::Var(_) => {}
        Term::Neg(a) | Term::Pow(a, _) => {
            divisors(a, out);
            if let Term::Pow(_, e) = t {
                if e.is_negative() {
                    out.push((**a).clone());
                }
            }
        }
        Term::Div(a, b) => {
            divisors(a, out);
            divisors(b, out);
            let constant = crate::parser::const_fold(b).is_some_and(|c| !c.is_zero());
            if !constant && !out.contains(b) {
                out.push((**b).clone());
            }
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
            divisors(a, out);
            divisors(b, out);
        }
        Term::App(_, args) => args.iter().for_each(|a| divisors(a, out)),
        Term::At(..) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn n(s: &str) -> RatFun {
        normalize(&parse_term(s).unwrap()).unwrap()
    }

    #[test]
    fn identity_normalizes_to_zero() {
        assert!(n("2*(1-y) - (2 - 2*y)").num.is_zero());
    }

    #[test]
    fn triangular_number_has_constant_denominator() {
        let r = n("x*(x+1)/2");
        assert!(r.is_poly());
        assert_eq!(r.num, n("x^2/2 + x/2").num);
    }

    #[test]
    fn exact_division_cancels() {
        let r = n("v - B*(v/B)");
        assert!(r.num.is_zero());
        assert!(n("(x^2 - y^2)/(x - y)").is_poly());
    }

    #[test]
    fn rational_exponent_is_rejected() {
        assert!(matches!(normalize(&parse_term("x^(1/2)").unwrap()), Err(NormError::RationalExponent(_))));
    }

    #[test]
    fn ode_solution_expansion() {
        let r = n("v + acc*T");
        assert_eq!(r.num.terms.len(), 2);
    }
}

//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::ast::{Rat, Term, Var};

/// Power product, sorted by variable with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mono(pub Vec<(Var, u32)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn var(x: Var) -> Mono {
        Mono(vec![(x, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exp(&self, x: &Var) -> u32 {
        self.0.iter().find(|(y, _)| y == x).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut m: BTreeMap<Var, u32> = self.0.iter().cloned().collect();
        for (x, e) in &other.0 {
            *m.entry(x.clone()).or_insert(0) += e;
        }
        Mono(m.into_iter().collect())
    }

    /// `self / other` if it divides exactly.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut m: BTreeMap<Var, u32> = self.0.iter().cloned().collect();
        for (x, e) in &other.0 {
            let have = m.get_mut(x)?;
            if *have < *e {
                return None;
            }
            *have -= e;
            if *have == 0 {
                m.remove(x);
            }
        }
        Some(Mono(m.into_iter().collect()))
    }

    /// Remove variable `x`, returning its exponent.
    pub fn without(&self, x: &Var) -> (Mono, u32) {
        let e = self.exp(x);
        (Mono(self.0.iter().filter(|(y, _)| y != x).cloned().collect()), e)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter().map(|(x, _)| x)
    }

    /// Square-free check: every exponent even makes the monomial a square.
    pub fn is_square(&self) -> bool {
        self.0.iter().all(|(_, e)| e % 2 == 0)
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(x, e)| if *e == 1 { x.to_string() } else { format!("{}^{}", x, e) })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    pub terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(Rat::from_integer(n.into()))
    }

    pub fn var(x: Var) -> Poly {
        Poly::mono(Mono::var(x), Rat::one())
    }

    pub fn mono(m: Mono, c: Rat) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, x: &Var) -> u32 {
        self.terms.keys().map(|m| m.exp(x)).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(n, k)| (n.mul(m), k * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::int(1);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, x: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(x);
            if e == 0 {
                continue;
            }
            let m2 = if e > 1 { rest.mul(&Mono(vec![(x.clone(), e - 1)])) } else { rest };
            out.add_term(m2, c * Rat::from_integer(e.into()));
        }
        out
    }

    /// Substitute polynomials for variables, simultaneously.
    pub fn subst(&self, s: &BTreeMap<Var, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            let mut plain = Mono::one();
            for (x, e) in &m.0 {
                match s.get(x) {
                    Some(p) => term = &term * &p.pow(*e),
                    None => plain = plain.mul(&Mono(vec![(x.clone(), *e)])),
                }
            }
            out = &out + &term.mul_mono(&plain, &Rat::one());
        }
        out
    }

    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<Rat>) -> Option<Rat> {
        let mut sum = Rat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, e) in &m.0 {
                v *= num_traits::pow(env(x)?, *e as usize);
            }
            sum += v;
        }
        Some(sum)
    }

    /// View as a polynomial in `x`: coefficient list indexed by exponent.
    pub fn coeffs_in(&self, x: &Var) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(x) as usize + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(x);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    /// Exact division by a polynomial with a single term.
    pub fn div_mono(&self, m: &Mono, c: &Rat) -> Option<Poly> {
        let mut out = Poly::zero();
        for (n, k) in &self.terms {
            out.add_term(n.div(m)?, k / c);
        }
        Some(out)
    }

    /// Scale so the leading coefficient has magnitude 1.
    pub fn monic_up_to_sign(&self) -> Poly {
        match self.terms.iter().next_back() {
            None => Poly::zero(),
            Some((_, c)) => self.scale(&(Rat::one() / c.abs())),
        }
    }

    pub fn to_term(&self) -> Term {
        let mut out: Option<Term> = None;
        for (m, c) in self.terms.iter().rev() {
            let mut factors: Vec<Term> = Vec::new();
            for (x, e) in &m.0 {
                let v = Term::Var(x.clone());
                factors.push(if *e == 1 { v } else { Term::Pow(Box::new(v), Rat::from_integer((*e).into())) });
            }
            let mag = c.abs();
            let mono = factors.into_iter().reduce(|a, b| Term::Mul(Box::new(a), Box::new(b)));
            let body = match mono {
                None => Term::Num(mag.clone()),
                Some(t) if mag.is_one() => t,
                Some(t) => Term::Mul(Box::new(Term::Num(mag.clone())), Box::new(t)),
            };
            out = Some(match out {
                None if c.is_negative() => Term::Neg(Box::new(body)),
                None => body,
                Some(acc) if c.is_negative() => Term::Sub(Box::new(acc), Box::new(body)),
                Some(acc) => Term::Add(Box::new(acc), Box::new(body)),
            });
        }
        out.unwrap_or_else(|| Term::num(0))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::printer::term(&self.to_term()))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rat::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(Var::new("x"))
    }
    fn y() -> Poly {
        Poly::var(Var::new("y"))
    }

    #[test]
    fn cancellation_leaves_zero() {
        let p = &(&x() * &y()) - &(&y() * &x());
        assert!(p.is_zero());
    }

    #[test]
    fn binomial_square() {
        let s = (&x() + &y()).pow(2);
        let expect = &(&(&x() * &x()) + &(&x() * &y()).scale(&Rat::from_integer(2.into()))) + &(&y() * &y());
        assert_eq!(s, expect);
    }

    #[test]
    fn derivative_of_power() {
        let p = x().pow(3);
        assert_eq!(p.derivative(&Var::new("x")), x().pow(2).scale(&Rat::from_integer(3.into())));
    }

    #[test]
    fn substitution() {
        let mut s = BTreeMap::new();
        s.insert(Var::new("x"), &y() + &Poly::int(1));
        assert_eq!(x().pow(2).subst(&s), (&y() + &Poly::int(1)).pow(2));
    }
}

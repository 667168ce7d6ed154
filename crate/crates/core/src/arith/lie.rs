//! Lie derivatives of polynomials along polynomial vector fields.

use std::collections::BTreeMap;

use super::poly::Poly;
use crate::ast::Var;

/// `Σ (∂p/∂x)·field[x]`; variables without an equation are constants.
pub fn lie_derivative(p: &Poly, field: &BTreeMap<Var, Poly>) -> Poly {
    let mut out = Poly::zero();
    for x in p.vars() {
        if let Some(rhs) = field.get(&x) {
            out = &out + &(&p.derivative(&x) * rhs);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratfun::normalize_poly;
    use crate::parser::parse_term;

    fn p(s: &str) -> Poly {
        normalize_poly(&parse_term(s).unwrap()).unwrap().unwrap()
    }

    fn field(eqs: &[(&str, &str)]) -> BTreeMap<Var, Poly> {
        eqs.iter().map(|(x, t)| (Var::new(*x), p(t))).collect()
    }

    #[test]
    fn circle_is_conserved() {
        assert!(lie_derivative(&p("x^2 + y^2"), &field(&[("x", "y"), ("y", "-x")])).is_zero());
    }

    #[test]
    fn ghost_invariant_is_conserved() {
        assert!(lie_derivative(&p("x*y^2 - 1"), &field(&[("x", "-x"), ("y", "y/2")])).is_zero());
    }

    #[test]
    fn clock() {
        assert_eq!(lie_derivative(&p("x"), &field(&[("x", "1")])), Poly::int(1));
    }
}

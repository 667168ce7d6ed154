//! Exact evaluation of terms and formulas under rational assignments, and
//! random sampling of implications.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ast::{Cmp, Formula, Rat, Term, Var};

pub type Env = BTreeMap<Var, Rat>;

/// Exact `n`-th root of a nonnegative rational, if it exists.
pub fn exact_root(r: &Rat, n: u32) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let root = |i: &BigInt| {
        let c = i.nth_root(n);
        if num_traits::pow(c.clone(), n as usize) == *i {
            Some(c)
        } else {
            None
        }
    };
    Some(Rat::new(root(r.numer())?, root(r.denom())?))
}

pub fn rat_pow(base: &Rat, e: &Rat) -> Option<Rat> {
    let n: i64 = e.numer().try_into().ok()?;
    let d: u32 = e.denom().try_into().ok()?;
    if n.unsigned_abs() > 4096 {
        return None;
    }
    let b = if d == 1 { base.clone() } else { exact_root(base, d)? };
    if n < 0 && b.is_zero() {
        return None;
    }
    let p = num_traits::pow(b, n.unsigned_abs() as usize);
    Some(if n < 0 { p.recip() } else { p })
}

pub fn term(t: &Term, env: &Env) -> Option<Rat> {
    Some(match t {
        Term::Num(r) => r.clone(),
        Term::Var(x) => env.get(x)?.clone(),
        Term::Neg(a) => -term(a, env)?,
        Term::Add(a, b) => term(a, env)? + term(b, env)?,
        Term::Sub(a, b) => term(a, env)? - term(b, env)?,
        Term::Mul(a, b) => term(a, env)? * term(b, env)?,
        Term::Div(a, b) => {
            let d = term(b, env)?;
            if d.is_zero() {
                return None;
            }
            term(a, env)? / d
        }
        Term::Pow(a, e) => rat_pow(&term(a, env)?, e)?,
        Term::Min(a, b) => term(a, env)?.min(term(b, env)?),
        Term::Max(a, b) => term(a, env)?.max(term(b, env)?),
        Term::App(..) | Term::At(..) => return None,
    })
}

pub fn compare(op: Cmp, a: &Rat, b: &Rat) -> bool {
    match op {
        Cmp::Le => a <= b,
        Cmp::Lt => a < b,
        Cmp::Eq => a == b,
        Cmp::Ge => a >= b,
        Cmp::Gt => a > b,
        Cmp::Ne => a != b,
    }
}

/// `None` when the formula cannot be evaluated: quantifiers, modalities,
/// predicates, undefined terms.
pub fn formula(f: &Formula, env: &Env) -> Option<bool> {
    Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => compare(*op, &term(a, env)?, &term(b, env)?),
        Formula::Not(a) => !formula(a, env)?,
        Formula::And(a, b) => formula(a, env)? && formula(b, env)?,
        Formula::Or(a, b) => formula(a, env)? || formula(b, env)?,
        Formula::Imply(a, b) => !formula(a, env)? || formula(b, env)?,
        Formula::Iff(a, b) => formula(a, env)? == formula(b, env)?,
        _ => return None,
    })
}

pub fn random_rat(rng: &mut impl Rng) -> Rat {
    let num: i64 = match rng.gen_range(0..4) {
        0 => rng.gen_range(-3..=3),
        1 => rng.gen_range(-20..=20),
        _ => rng.gen_range(-1000..=1000),
    };
    let den: i64 = match rng.gen_range(0..3) {
        0 => 1,
        1 => rng.gen_range(1..=4),
        _ => rng.gen_range(1..=100),
    };
    Rat::new(num.into(), den.into())
}

/// Outcome of sampling an implication.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleReport {
    /// Samples where every hypothesis held.
    pub relevant: usize,
    pub violation: Option<Env>,
}

/// Evaluate `hyps -> concl` on `n` random assignments. Hypotheses of the
/// form `x = t` define `x` from the other variables, which makes samples
/// satisfying equational contexts common.
pub fn sample_implication(hyps: &[Formula], concl: &Formula, n: usize, seed: u64) -> SampleReport {
    let mut vars = concl.free_vars();
    for h in hyps {
        vars.extend(h.free_vars());
    }
    let mut defs: Vec<(Var, Term)> = Vec::new();
    for h in hyps {
        for c in h.conjuncts() {
            if let Formula::Cmp(Cmp::Eq, a, b) = c {
                for (l, r) in [(a, b), (b, a)] {
                    if let Term::Var(x) = l {
                        if !r.free_vars().contains(x) && !defs.iter().any(|(y, _)| y == x) {
                            defs.push((x.clone(), r.clone()));
                            break;
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SampleReport::default();
    for _ in 0..n {
        let mut env: Env = vars.iter().map(|v| (v.clone(), random_rat(&mut rng))).collect();
        for _ in 0..defs.len() {
            for (x, t) in &defs {
                if let Some(v) = term(t, &env) {
                    env.insert(x.clone(), v);
                }
            }
        }
        let held = hyps.iter().map(|h| formula(h, &env)).collect::<Option<Vec<bool>>>();
        let Some(held) = held else { continue };
        if !held.iter().all(|b| *b) {
            continue;
        }
        match formula(concl, &env) {
            Some(true) => report.relevant += 1,
            Some(false) => {
                report.relevant += 1;
                report.violation = Some(env);
                return report;
            }
            None => {}
        }
    }
    report
}

pub fn env_string(env: &Env) -> String {
    let parts: Vec<String> =
        env.iter().map(|(x, v)| format!("{} = {}", x, crate::printer::rat_str(v))).collect();
    parts.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ratio;
    use crate::parser::parse_formula;

    #[test]
    fn roots_are_exact() {
        assert_eq!(exact_root(&ratio(9, 4), 2), Some(ratio(3, 2)));
        assert_eq!(exact_root(&ratio(2, 1), 2), None);
        assert_eq!(rat_pow(&ratio(1, 1), &ratio(1, 2)), Some(ratio(1, 1)));
    }

    #[test]
    fn sampling_finds_violation() {
        let h = parse_formula("x > 0").unwrap();
        let c = parse_formula("x > 1").unwrap();
        assert!(sample_implication(&[h], &c, 1000, 1).violation.is_some());
    }

    #[test]
    fn equational_hypotheses_drive_samples() {
        let h = parse_formula("y = x + 1").unwrap();
        let c = parse_formula("y > x").unwrap();
        let r = sample_implication(&[h], &c, 200, 7);
        assert!(r.violation.is_none());
        assert!(r.relevant > 100);
    }
}

use std::collections::BTreeMap;

use proptest::prelude::*;

use kaisar::arith::lie::lie_derivative;
use kaisar::arith::poly::Poly;
use kaisar::arith::ratfun::normalize_poly;
use kaisar::ast::{Cmp, Formula, Rat, Term, Var};
use kaisar::elab::elaborate;
use kaisar::parser::{parse_document, parse_formula};
use kaisar::printer;

const NAMES: [&str; 3] = ["x", "y", "z"];

fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (-4i64..=4).prop_map(|n| Term::Num(int(n))),
        (0..3usize).prop_map(|i| Term::Var(Var::new(NAMES[i]))),
    ];
    leaf.prop_recursive(4, 24, 2, |t| {
        let b = Box::new;
        prop_oneof![
            (t.clone(), t.clone()).prop_map(move |(x, y)| Term::Add(b(x), b(y))),
            (t.clone(), t.clone()).prop_map(move |(x, y)| Term::Sub(b(x), b(y))),
            (t.clone(), t.clone()).prop_map(move |(x, y)| Term::Mul(b(x), b(y))),
            t.clone().prop_map(move |x| Term::Neg(b(x))),
            (t, 0i64..=3).prop_map(move |(x, e)| Term::Pow(b(x), int(e))),
        ]
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    let cmp = prop_oneof![Just(Cmp::Le), Just(Cmp::Lt), Just(Cmp::Eq), Just(Cmp::Ge), Just(Cmp::Gt), Just(Cmp::Ne)];
    let atom = (cmp, term(), term()).prop_map(|(c, a, b)| Formula::Cmp(c, a, b));
    atom.prop_recursive(3, 12, 2, |f| {
        let b = Box::new;
        prop_oneof![
            (f.clone(), f.clone()).prop_map(move |(x, y)| Formula::And(b(x), b(y))),
            (f.clone(), f.clone()).prop_map(move |(x, y)| Formula::Or(b(x), b(y))),
            (f.clone(), f.clone()).prop_map(move |(x, y)| Formula::Imply(b(x), b(y))),
            f.prop_map(move |x| Formula::Not(b(x))),
        ]
    })
}

fn env() -> impl Strategy<Value = BTreeMap<Var, Rat>> {
    proptest::collection::vec((-20i64..=20, 1i64..=5), 3)
        .prop_map(|v| NAMES.iter().zip(v).map(|(n, (a, d))| (Var::new(*n), Rat::new(a.into(), d.into()))).collect())
}

/// Direct evaluation, independent of the polynomial normal form.
fn eval(t: &Term, env: &BTreeMap<Var, Rat>) -> Rat {
    match t {
        Term::Num(r) => r.clone(),
        Term::Var(v) => env[v].clone(),
        Term::Neg(a) => -eval(a, env),
        Term::Add(a, b) => eval(a, env) + eval(b, env),
        Term::Sub(a, b) => eval(a, env) - eval(b, env),
        Term::Mul(a, b) => eval(a, env) * eval(b, env),
        Term::Pow(a, e) => {
            let base = eval(a, env);
            (0..e.to_integer().try_into().unwrap()).fold(int(1), |acc: Rat, _: u32| acc * &base)
        }
        other => panic!("not generated: {:?}", other),
    }
}

fn poly(t: &Term) -> Poly {
    normalize_poly(t).unwrap().unwrap()
}

fn at(p: &Poly, env: &BTreeMap<Var, Rat>) -> Rat {
    p.eval(&|v| env.get(v).cloned()).unwrap()
}

fn field() -> impl Strategy<Value = BTreeMap<Var, Poly>> {
    proptest::collection::vec(term(), 3).prop_map(|ts| NAMES.iter().zip(ts).map(|(n, t)| (Var::new(*n), poly(&t))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normal_form_preserves_value(t in term(), e in env()) {
        prop_assert_eq!(at(&poly(&t), &e), eval(&t, &e));
    }

    #[test]
    fn substitution_commutes_with_evaluation(t in term(), s in term(), e in env()) {
        let x = Var::new("x");
        let sub = [(x.clone(), s.clone())].into_iter().collect();
        let mut shifted = e.clone();
        shifted.insert(x, eval(&s, &e));
        prop_assert_eq!(eval(&t.subst(&sub), &e), eval(&t, &shifted));
    }

    #[test]
    fn lie_derivative_is_linear(p in term(), q in term(), f in field(), k in -3i64..=3) {
        let (p, q) = (poly(&p), poly(&q));
        let lhs = lie_derivative(&(&p + &q.scale(&int(k))), &f);
        let rhs = &lie_derivative(&p, &f) + &lie_derivative(&q, &f).scale(&int(k));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lie_derivative_obeys_leibniz(p in term(), q in term(), f in field()) {
        let (p, q) = (poly(&p), poly(&q));
        let lhs = lie_derivative(&(&p * &q), &f);
        let rhs = &(&lie_derivative(&p, &f) * &q) + &(&p * &lie_derivative(&q, &f));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lie_derivative_of_constants_vanishes(c in -9i64..=9, f in field()) {
        prop_assert!(lie_derivative(&Poly::int(c), &f).is_zero());
    }

    #[test]
    fn printed_formulas_parse_back(f in formula()) {
        let text = printer::formula(&f);
        let again = parse_formula(&text).map_err(|d| TestCaseError::fail(d.message))?;
        prop_assert_eq!(printer::formula(&again), text);
    }
}

/// Statement `k` is `l{k}: v{k} := Σ v{m}@l{j};`, followed by a final label
/// `l{n}`. Wherever it occurs, `v{m}@l{j}` is the right-hand side of
/// statement `m` when `m < j`, and the initial `v{m}` otherwise.
fn label_doc(refs: &[Vec<(usize, usize)>]) -> String {
    let n = refs.len();
    let mut src = String::new();
    for (k, rs) in refs.iter().enumerate() {
        let rhs: Vec<String> = rs.iter().map(|(m, j)| format!("v{}@l{}", m, j)).chain(["1".to_string()]).collect();
        src.push_str(&format!("l{}: v{} := {};\n", k, k, rhs.join(" + ")));
    }
    src.push_str(&format!("l{}:\n", n));
    src
}

fn has_cycle(refs: &[Vec<(usize, usize)>]) -> bool {
    let n = refs.len();
    let edges: Vec<Vec<usize>> = refs
        .iter()
        .map(|rs| rs.iter().filter(|(m, j)| m < j).map(|(m, _)| *m).collect())
        .collect();
    // 0 unvisited, 1 on the stack, 2 finished
    fn dfs(u: usize, edges: &[Vec<usize>], mark: &mut [u8]) -> bool {
        mark[u] = 1;
        for &v in &edges[u] {
            if mark[v] == 1 || (mark[v] == 0 && dfs(v, edges, mark)) {
                return true;
            }
        }
        mark[u] = 2;
        false
    }
    let mut mark = vec![0u8; n];
    (0..n).any(|u| mark[u] == 0 && dfs(u, &edges, &mut mark))
}

fn label_refs() -> impl Strategy<Value = Vec<Vec<(usize, usize)>>> {
    (1usize..=5).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec((0..n, 0..=n), 0..=2), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn label_cycles_are_exactly_the_rejected_documents(refs in label_refs()) {
        let src = label_doc(&refs);
        let doc = parse_document(&src).map_err(|d| TestCaseError::fail(d.message))?;
        let cyclic = has_cycle(&refs);
        match elaborate(&doc) {
            Ok(_) => prop_assert!(!cyclic, "accepted a cycle:\n{}", src),
            Err(ds) => {
                prop_assert!(cyclic, "rejected an acyclic document:\n{}\n{:?}", src, ds);
                prop_assert!(ds.iter().any(|d| d.message.contains("cyclic")), "{:?}", ds);
            }
        }
    }
}

#[test]
fn label_generator_covers_both_outcomes() {
    assert!(has_cycle(&[vec![(0, 1)]]));
    assert!(!has_cycle(&[vec![(0, 0)]]));
    assert!(has_cycle(&[vec![(1, 2)], vec![(0, 1)]]));
    assert!(!has_cycle(&[vec![(1, 2)], vec![(0, 0)]]));
}

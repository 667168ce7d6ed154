use super::*;
use crate::arith::ratfun::normalize;
use crate::parser::{parse_document, parse_formula, parse_term};

fn elab(src: &str) -> Elaborated {
    elaborate(&parse_document(src).unwrap()).unwrap_or_else(|e| panic!("{:?}", e))
}

fn elab_err(src: &str) -> Vec<Diagnostic> {
    elaborate(&parse_document(src).unwrap()).err().expect("expected an elaboration error")
}

fn flat(stmts: &[IStmt], out: &mut Vec<IStmt>) {
    for s in stmts {
        out.push(s.clone());
        match &s.kind {
            IKind::Loop { body, .. } | IKind::Ghost(body) | IKind::InverseGhost(body) | IKind::Block(body) => {
                flat(body, out)
            }
            IKind::Choice { branches, .. } => branches.iter().for_each(|b| flat(b, out)),
            IKind::Switch { cases, .. } => cases.iter().for_each(|c| flat(&c.body, out)),
            _ => {}
        }
    }
}

fn all(e: &Elaborated) -> Vec<IStmt> {
    let mut out = vec![];
    flat(&e.stmts, &mut out);
    out
}

fn same_value(a: &Term, b: &Term) -> bool {
    let d = Term::Sub(Box::new(a.clone()), Box::new(b.clone()));
    normalize(&d).map(|r| r.num.is_zero()).unwrap_or(false)
}

#[test]
fn straight_line_renaming() {
    let e = elab("x := 0; x := x + 1;");
    let s = all(&e);
    assert!(matches!(&s[0].kind, IKind::Assign { var, rhs: Some(t), .. } if *var == Var::ssa("x", 1) && *t == Term::num(0)));
    let IKind::Assign { var, rhs: Some(t), .. } = &s[1].kind else { panic!() };
    assert_eq!(*var, Var::ssa("x", 2));
    assert_eq!(*t, Term::Add(Box::new(Term::Var(Var::ssa("x", 1))), Box::new(Term::num(1))));
}

#[test]
fn backward_label_uses_snapshot() {
    let e = elab("x := 0; init: x := x + 1; !(x > x@init);");
    let s = all(&e);
    let IKind::Assert { fml, .. } = &s[3].kind else { panic!() };
    assert_eq!(printer::formula(fml), "x_2 > x_1");
}

#[test]
fn forward_label_substitutes_assignments() {
    let e = elab("x := 0;\ninit: !(x < x@final); x := x + 1; x := x + 2;\nfinal:");
    let s = all(&e);
    let IKind::Assert { fml: Formula::Cmp(_, _, r), .. } = &s[2].kind else { panic!() };
    // (x@init + 1) + 2, with x@init = x_1
    assert!(same_value(r, &parse_term("x_1 + 3").unwrap().map_vars(&mut |v| {
        (v.name == "x_1").then(|| Term::Var(Var::ssa("x", 1)))
    })));
}

#[test]
fn forward_label_into_branch() {
    let e = elab("x := 0; y := x@mid;\ninit: { {x := x + 3; mid: x := x * x;} ++ x := 5; }");
    let s = all(&e);
    let IKind::Assign { rhs: Some(t), .. } = &s[1].kind else { panic!() };
    let t = t.subst(&[(Var::ssa("x", 1), Term::num(0))].into_iter().collect());
    assert!(same_value(&t, &Term::num(3)));
}

#[test]
fn reference_from_inside_a_branch_takes_that_branch() {
    let e = elab("{ {y := x@final; x := 2;} ++ x := 5;} x := x + 1;\nfinal:");
    let s = all(&e);
    let IKind::Assign { rhs: Some(t), .. } = &s[2].kind else { panic!("{:?}", s[2]) };
    assert!(same_value(t, &Term::num(3)));
}

#[test]
fn ode_solution_through_clock_parameter() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus/mpc.kaisar")).unwrap();
    let e = elab(&src);
    let env = all(&e)
        .into_iter()
        .find_map(|s| match s.kind {
            IKind::Assume { name: Some(n), fml } if n == "env" => Some(fml),
            _ => None,
        })
        .unwrap();
    let env = unssa_formula(&env);
    let safe = Box::new(env.conjuncts().last().copied().unwrap().clone());
    let want = parse_formula("(v + acc*T)^2/(2*B) <= d - (x + v*T + acc*T^2/2)").unwrap();
    let (Formula::Cmp(o1, a1, b1), Formula::Cmp(o2, a2, b2)) = (*safe, want) else { panic!() };
    assert_eq!(o1, o2);
    assert!(same_value(&a1, &a2) && same_value(&b1, &b2));
}

#[test]
fn stop_time_is_zero_velocity() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus/stop-time.kaisar")).unwrap();
    let e = elab(&src);
    let s = all(&e);
    let IKind::Assert { fml: Formula::Cmp(_, l, _), .. } = &s[1].kind else { panic!() };
    assert!(same_value(l, &Term::num(0)), "{}", printer::term(l));
    let printed = s.iter().find_map(|s| match &s.kind {
        IKind::Print(Expr::Formula(f)) => Some(f.clone()),
        _ => None,
    });
    assert!(printed.is_some());
}

#[test]
fn cyclic_labels_are_rejected() {
    let errs = elab_err("x := x@two; one: x := x@one; two:");
    assert!(errs[0].message.contains("`one`") && errs[0].message.contains("`two`"), "{}", errs[0].message);
    let errs = elab_err("x := 0; x := x@a + 1; a: x := x@a;");
    assert!(errs[0].message.contains("cyclic"), "{}", errs[0].message);
}

#[test]
fn nondeterminism_demands_parameters() {
    let errs = elab_err("y := x@later; x := *; later:");
    assert!(errs[0].message.contains("`x`"), "{}", errs[0].message);
    assert!(errs[0].hint.as_deref().unwrap_or("").contains("parameters"));
}

#[test]
fn label_inside_loop_is_local() {
    let errs = elab_err("{ x := x + 1; inner: }* y := x@inner;");
    assert!(errs[0].message.contains("inside a loop"));
}

#[test]
fn loop_merges_and_persistent_facts() {
    let e = elab("?xZero:(x := 0); { x := x + 1; }* !(x >= 0);");
    let s = all(&e);
    let IKind::Loop { carried, .. } = &s[1].kind else { panic!() };
    assert_eq!(carried[0].pre, Var::ssa("x", 1));
    assert_eq!(carried[0].merge, Var::ssa("x", 2));
    assert_eq!(carried[0].end, Var::ssa("x", 3));
    let IKind::Assert { fml, .. } = &s[3].kind else { panic!() };
    assert_eq!(printer::formula(fml), "x_2 >= 0");
}

#[test]
fn ghost_assignment_to_game_variable_is_rejected() {
    let errs = elab_err("x := 1; /++ x := 2; ++/ y := x;");
    assert!(errs[0].message.contains("forward ghost"));
}

#[test]
fn corpus_elaborates() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus");
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().map(|e| e == "kaisar").unwrap_or(false) {
            let src = std::fs::read_to_string(&p).unwrap();
            let doc = parse_document(&src).unwrap();
            if let Err(e) = elaborate(&doc) {
                panic!("{}: {:?}", p.display(), e);
            }
        }
    }
}

#[test]
#[ignore]
fn show() {
    let p = std::env::var("SHOW").unwrap();
    let e = elab(&std::fs::read_to_string(p).unwrap());
    println!("{}\n{}", e.dump_ssa(), e.dump_labels());
}

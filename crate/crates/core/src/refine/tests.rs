use super::*;
use crate::check::{check, Config};
use crate::elab::elaborate;
use crate::parser::{parse_document, parse_formula, parse_game};
use crate::reify::reify;

fn conclude(src: &str) -> (Elaborated, Conclusion) {
    let doc = parse_document(src).expect("parses");
    let el = elaborate(&doc).expect("elaborates");
    let c = check(&el, &Config::default());
    assert!(c.ok(), "{:?}", c.diagnostics);
    let con = reify(&el, &c.facts, None, Span::default()).expect("reifies");
    (el, con)
}

fn backend() -> Backend {
    Backend::default()
}

fn game(s: &str) -> Game {
    parse_game(s).expect("game parses")
}

fn proves_str(src: &str, target: &str) -> Result<Trace, Diagnostic> {
    let (el, con) = conclude(src);
    proves(&el, &con, &parse_formula(target).expect("target parses"), &backend(), Span::default())
}

#[test]
fn assignment_plays_angelic_random() {
    let t = refines(&game("x := 3;"), &game("{x := *;}^@"), &backend());
    assert!(t.ok());
    assert!(t.steps.contains(&Step::AssignRefinesRandom("x".into())));
}

#[test]
fn different_assignment_fails_there() {
    let t = refines(&game("x := 3;"), &game("x := 4;"), &backend());
    let f = t.failure.expect("fails");
    assert!(f.strategy.contains("x := 3"), "{:?}", f);
    assert!(f.game.contains("x := 4"), "{:?}", f);
}

#[test]
fn assignment_does_not_play_demonic_random() {
    assert!(!refines(&game("x := 3;"), &game("x := *;"), &backend()).ok());
}

#[test]
fn dual_cancels() {
    assert!(refines(&game("{{x := *;}^@}^@"), &game("x := *;"), &backend()).ok());
}

#[test]
fn sequences_reassociate() {
    assert!(refines(&game("x := 1; {y := 2; z := 3;}"), &game("{x := 1; y := 2;} z := 3;"), &backend()).ok());
}

#[test]
fn demonic_tests_may_be_weaker_in_the_strategy() {
    assert!(refines(&game("?x >= 0;"), &game("?x > 0;"), &backend()).ok());
    assert!(!refines(&game("?x > 0;"), &game("?x >= 0;"), &backend()).ok());
}

#[test]
fn angelic_tests_may_be_stronger_in_the_strategy() {
    assert!(refines(&game("{?x > 0;}^@"), &game("{?x >= 0;}^@"), &backend()).ok());
    assert!(!refines(&game("{?x >= 0;}^@"), &game("{?x > 0;}^@"), &backend()).ok());
}

#[test]
fn strategy_picks_an_angelic_branch() {
    let t = refines(&game("x := 1;"), &game("{x := 1; ++ x := 2;}^@"), &backend());
    assert!(t.ok());
    assert!(t.steps.contains(&Step::PickBranch(0)));
}

#[test]
fn demonic_choice_needs_every_branch() {
    assert!(refines(&game("x := 2; ++ x := 1;"), &game("x := 1; ++ x := 2;"), &backend()).ok());
    assert!(!refines(&game("x := 1;"), &game("x := 1; ++ x := 2;"), &backend()).ok());
}

#[test]
fn choice_distributes_over_sequence() {
    let t = refines(&game("{x := 1; ++ x := 2;} y := 0;"), &game("{x := 1; y := 0;} ++ {x := 2; y := 0;}"), &backend());
    assert!(t.ok(), "{:?}", t.failure);
    assert!(t.steps.contains(&Step::Distribute));
}

#[test]
fn ode_domains_follow_polarity() {
    // a Demonic domain in the strategy must cover every run the game allows
    assert!(refines(&game("{x' = 1 & x <= 10}"), &game("{x' = 1 & x <= 5}"), &backend()).ok());
    assert!(!refines(&game("{x' = 1 & x <= 5}"), &game("{x' = 1 & x <= 10}"), &backend()).ok());
    assert!(refines(&game("{{x' = 1 & x <= 5}}^@"), &game("{{x' = 1 & x <= 10}}^@"), &backend()).ok());
    assert!(!refines(&game("{x' = 2}"), &game("{x' = 1}"), &backend()).ok());
}

#[test]
fn loops_refine_bodywise() {
    assert!(refines(&game("{x := x + 1;}*"), &game("{x := 1 + x;}*"), &backend()).ok());
    assert!(!refines(&game("{x := x + 1;}*"), &game("{{x := x + 1;}*}^@"), &backend()).ok());
}

#[test]
fn empty_document_concludes_true() {
    let (_, c) = conclude("let f(x) = x + 1;");
    assert_eq!(c.render(), "[?true;] true");
}

#[test]
fn trailing_assertion_becomes_postcondition() {
    let (_, c) = conclude("x := *; y := x+1; !(y > x);");
    assert_eq!(c.game, game("x := *; y := x + 1;"));
    assert_eq!(c.post, parse_formula("y > x").unwrap());
}

#[test]
fn forward_ghosts_are_erased() {
    let (_, c) = conclude("x := 1; /++ y := 2; ++/ !(x > 0);");
    assert_eq!(c.game, game("x := 1;"));
}

#[test]
fn inverse_ghosts_are_kept() {
    let (_, c) = conclude("x := 1; /-- y := 2; --/ !(x > 0);");
    assert_eq!(c.game, game("x := 1; {y := 2;}"));
}

#[test]
fn earlier_states_are_snapshotted() {
    let (_, c) = conclude("x := 1; a: x := x + 1; ?(x > x@a); !(x > 1);");
    let text = c.render();
    assert!(text.contains("x_1 := x;"), "{}", text);
    assert!(text.contains("?x > x_1;"), "{}", text);
}

#[test]
fn circle_proves_its_theorem() {
    let src = "x := 0; y := 1; {x' = y, y' = -x & !circle:(x^2 + y^2 = 1) by induction};";
    let t = proves_str(src, "[x:=0;y:=1;{x'=y,y'=-x}] x^2+y^2=1").expect("proves");
    assert!(t.ok());
}

#[test]
fn proves_rejects_unproven_postcondition() {
    let src = "x := 0; y := 1; {x' = y, y' = -x & !circle:(x^2 + y^2 = 1) by induction};";
    let d = proves_str(src, "[x:=0;y:=1;{x'=y,y'=-x}] x^2+y^2=2").unwrap_err();
    assert!(d.message.contains("does not imply"), "{}", d.message);
}

#[test]
fn proves_rejects_missing_branch() {
    let d = proves_str("x := 1; !(x > 0);", "[x := 1; ++ x := 2;] x > 0").unwrap_err();
    assert!(d.message.contains("does not play"), "{}", d.message);
}

#[test]
fn pldi_refines_the_bellerophon_problem() {
    let src = include_str!("../../tests/corpus/pldi-tac.kaisar");
    let defs = "let bounds() <-> (V > 0 & eps > 0);
        let init(d, v, t) <-> (d >= 0 & bounds() & v = 0 & t = 0);
        let safe(d) <-> (d >= 0);
        let ctrl ::= {{{?d >= V*eps; v := V; {?0 <= v & v <= V;}^@} ++ {v := 0;}}^@};
        let plant ::= {t := 0; {d' = -v, t' = 1 & t <= eps}};";
    let target = "init(d, v, t) -> [time := 0; {{{?(time <= 10000); ctrl; plant; time := time + 600;}^@}*}^@] safe(d)";
    let t = proves_str(&format!("{}\n{}", src, defs), target).expect("proves");
    assert!(t.ok());
}

#[test]
fn corpus_is_reflexive() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus");
    for p in std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()) {
        if p.extension().map(|e| e != "kaisar").unwrap_or(true) || p.ends_with("mpc.kaisar") {
            continue;
        }
        let src = std::fs::read_to_string(&p).unwrap();
        let doc = parse_document(&src).unwrap();
        let el = elaborate(&doc).unwrap();
        let c = check(&el, &Config::default());
        let con = reify(&el, &c.facts, None, Span::default()).unwrap();
        let target = parse_formula(&con.render()).unwrap_or_else(|e| panic!("{}: {:?}", p.display(), e));
        assert_eq!(target, con.formula(), "{} does not roundtrip", p.display());
        let r = proves(&el, &con, &target, &backend(), Span::default());
        assert!(r.is_ok(), "{}: {:?}", p.display(), r.err());
    }
}

#[test]
#[ignore]
fn show_corpus() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in paths.iter().filter(|p| p.extension().map(|e| e == "kaisar").unwrap_or(false)) {
        let src = std::fs::read_to_string(p).unwrap();
        let doc = parse_document(&src).unwrap();
        let el = elaborate(&doc).unwrap();
        let c = check(&el, &Config::default());
        match reify(&el, &c.facts, None, Span::default()) {
            Ok(con) => println!("{}: {}", p.file_name().unwrap().to_string_lossy(), con.render()),
            Err(d) => println!("{}: ERROR {}", p.file_name().unwrap().to_string_lossy(), d.message),
        }
    }
}

#[test]
fn independent_steps_reorder() {
    let t = refines(&game("y := 0; x := 0; ?c = 3;"), &game("?c = 3; x := 0; y := 0;"), &backend());
    assert!(t.ok(), "{:?}", t.failure);
    assert!(t.steps.iter().any(|s| matches!(s, Step::Reorder(_))));
}

#[test]
fn dependent_steps_keep_their_order() {
    assert!(!refines(&game("x := 1; y := x;"), &game("y := x; x := 1;"), &backend()).ok());
    assert!(!refines(&game("?x > 0; x := 0;"), &game("x := 0; ?x > 0;"), &backend()).ok());
}

#[test]
fn players_do_not_swap_choices() {
    // Angel choosing y after seeing x is not Angel choosing first
    assert!(!refines(&game("x := *; {y := *;}^@"), &game("{y := *;}^@ x := *;"), &backend()).ok());
}

#[test]
fn hypotheses_may_precede_the_strategy_assumptions() {
    let src = include_str!("../../tests/corpus/loop-invariant.kaisar");
    let t = proves_str(src, "c = 3 -> [x := 0; y := 0; {x := x + c;}*] x >= y").expect("proves");
    assert!(t.ok());
}

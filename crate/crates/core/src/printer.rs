//! Canonical surface syntax. Output reparses to the same AST.

use std::fmt::Write;

use num_traits::Signed;

use crate::ast::*;

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
const P_ATOM: u8 = 11;

fn wrap(s: String, prec: u8, min: u8) -> String {
    if prec < min {
        format!("({})", s)
    } else {
        s
    }
}

pub fn rat_str(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn num_prec(r: &Rat) -> u8 {
    if !r.is_integer() {
        P_MUL
    } else if r.is_negative() {
        P_NEG
    } else {
        P_ATOM
    }
}

pub fn term(t: &Term) -> String {
    term_p(t, 0)
}

fn term_p(t: &Term, min: u8) -> String {
    match t {
        Term::Num(r) => wrap(rat_str(r), num_prec(r), min),
        Term::Var(v) => v.to_string(),
        Term::Neg(a) => {
            let inner = match **a {
                Term::Num(ref r) if !r.is_negative() => format!("({})", rat_str(r)),
                _ => term_p(a, P_NEG),
            };
            wrap(format!("-{}", inner), P_NEG, min)
        }
        Term::Add(a, b) => wrap(format!("{} + {}", term_p(a, P_ADD), term_p(b, P_ADD + 1)), P_ADD, min),
        Term::Sub(a, b) => wrap(format!("{} - {}", term_p(a, P_ADD), term_p(b, P_ADD + 1)), P_ADD, min),
        Term::Mul(a, b) => wrap(format!("{}*{}", term_p(a, P_MUL), term_p(b, P_MUL + 1)), P_MUL, min),
        Term::Div(a, b) => wrap(format!("{}/{}", term_p(a, P_MUL), term_p(b, P_MUL + 1)), P_MUL, min),
        Term::Pow(a, e) => {
            let es = if e.is_integer() && !e.is_negative() { rat_str(e) } else { format!("({})", rat_str(e)) };
            wrap(format!("{}^{}", term_p(a, P_ATOM), es), P_POW, min)
        }
        Term::Min(a, b) => format!("min({}, {})", term(a), term(b)),
        Term::Max(a, b) => format!("max({}, {})", term(a), term(b)),
        Term::App(n, args) => format!("{}({})", n, terms(args)),
        Term::At(e, loc) => format!("{}@{}", term_p(e, P_ATOM), located(loc)),
    }
}

fn terms(ts: &[Term]) -> String {
    ts.iter().map(term).collect::<Vec<_>>().join(", ")
}

fn located(l: &Located) -> String {
    if l.args.is_empty() {
        l.label.clone()
    } else {
        format!("{}({})", l.label, terms(&l.args))
    }
}

pub fn formula(f: &Formula) -> String {
    formula_p(f, 0)
}

fn formula_p(f: &Formula, min: u8) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Cmp(op, a, b) => {
            wrap(format!("{} {} {}", term_p(a, P_ADD), op.symbol(), term_p(b, P_ADD)), P_CMP, min)
        }
        Formula::Not(a) => wrap(format!("!{}", formula_p(a, P_NOT)), P_NOT, min),
        Formula::And(a, b) => wrap(format!("{} & {}", formula_p(a, P_AND), formula_p(b, P_AND + 1)), P_AND, min),
        Formula::Or(a, b) => wrap(format!("{} | {}", formula_p(a, P_OR), formula_p(b, P_OR + 1)), P_OR, min),
        Formula::Imply(a, b) => {
            wrap(format!("{} -> {}", formula_p(a, P_IMPLY + 1), formula_p(b, P_IMPLY)), P_IMPLY, min)
        }
        Formula::Iff(a, b) => {
            wrap(format!("{} <-> {}", formula_p(a, P_EQUIV + 1), formula_p(b, P_EQUIV)), P_EQUIV, min)
        }
        Formula::Forall(x, a) => format!("(\\forall {} {})", x, formula_p(a, P_NOT)),
        Formula::Exists(x, a) => format!("(\\exists {} {})", x, formula_p(a, P_NOT)),
        Formula::Box(g, p) => wrap(format!("[{}] {}", game(g), formula_p(p, P_NOT)), P_NOT, min),
        Formula::Diamond(g, p) => wrap(format!("<{}> {}", game(g), formula_p(p, P_NOT)), P_NOT, min),
        Formula::Pred(n, args) => format!("{}({})", n, terms(args)),
        Formula::At(e, loc) => format!("{}@{}", formula_p(e, P_ATOM), located(loc)),
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Term(t) => term(t),
        Expr::Formula(f) => formula(f),
    }
}

pub fn game(g: &Game) -> String {
    game_p(g, false)
}

/// `in_seq`: the game is an element of a sequence, so choices and nested
/// sequences need braces.
fn game_p(g: &Game, in_seq: bool) -> String {
    match g {
        Game::Assign(x, t) => format!("{} := {};", x, term(t)),
        Game::Random(x) => format!("{} := *;", x),
        Game::Test(f) => format!("?{};", formula(f)),
        Game::Ode(eqs, dom) => {
            let es: Vec<String> = eqs.iter().map(|(x, t)| format!("{}' = {}", x, term(t))).collect();
            if *dom == Formula::True {
                format!("{{{}}}", es.join(", "))
            } else {
                format!("{{{} & {}}}", es.join(", "), formula(dom))
            }
        }
        Game::Seq(gs) => {
            let s = gs.iter().map(|x| game_p(x, true)).collect::<Vec<_>>().join(" ");
            if in_seq {
                format!("{{{}}}", s)
            } else {
                s
            }
        }
        Game::Choice(a, b) => {
            let right = match **b {
                Game::Choice(..) => format!("{{{}}}", game(b)),
                _ => game_p(b, false),
            };
            let s = format!("{} ++ {}", game_p(a, false), right);
            if in_seq {
                format!("{{{}}}", s)
            } else {
                s
            }
        }
        Game::Repeat(a) => format!("{{{}}}*", game(a)),
        Game::Dual(a) => format!("{{{}}}^@", game(a)),
        Game::Call(n) => format!("{};", n),
    }
}

fn proof_term(pt: &ProofTerm) -> String {
    match pt {
        ProofTerm::Fact(n) => n.clone(),
        ProofTerm::Ellipsis => "...".into(),
        ProofTerm::Rule(n, args) => {
            format!("{}({})", n, args.iter().map(proof_term).collect::<Vec<_>>().join(", "))
        }
    }
}

fn method(m: &Method) -> String {
    match m {
        Method::Guard(Some(t)) => format!("guard({})", term(t)),
        m => m.name().to_string(),
    }
}

fn fact_head(sigil: char, name: &Option<String>) -> String {
    match name {
        Some(n) => format!("{}{}:", sigil, n),
        None => sigil.to_string(),
    }
}

fn assertion(name: &Option<String>, fml: &Formula, using: &Option<Vec<ProofTerm>>, m: &Option<Method>) -> String {
    let mut s = format!("{}({})", fact_head('!', name), formula(fml));
    if let Some(us) = using {
        s.push_str(" using");
        for u in us {
            s.push(' ');
            s.push_str(&proof_term(u));
        }
    }
    if let Some(m) = m {
        s.push_str(" by ");
        s.push_str(&method(m));
    }
    s
}

fn assignment(name: &Option<String>, var: &Var, rhs: &Option<Term>, fact: bool) -> String {
    let r = match rhs {
        Some(t) => term(t),
        None => "*".into(),
    };
    if fact {
        format!("{}({} := {})", fact_head('?', name), var, r)
    } else {
        format!("{} := {}", var, r)
    }
}

fn head(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Assume { name, fml } => format!("{}({})", fact_head('?', name), formula(fml)),
        StmtKind::Assert { name, fml, using, method } => assertion(name, fml, using, method),
        StmtKind::Assign { name, var, rhs, fact } => assignment(name, var, rhs, *fact),
        _ => unreachable!("not a header statement"),
    }
}

fn ode(o: &OdeProof) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < o.eqs.len() {
        let g = o.eqs[i].ghost;
        let mut j = i;
        let mut group = Vec::new();
        while j < o.eqs.len() && o.eqs[j].ghost == g {
            let e = &o.eqs[j];
            let nm = e.name.as_ref().map(|n| format!("{}: ", n)).unwrap_or_default();
            group.push(format!("{}{}' = {}", nm, e.var, term(&e.rhs)));
            j += 1;
            if g == GhostKind::None {
                break;
            }
        }
        parts.push(match g {
            GhostKind::None => group.join(", "),
            GhostKind::Forward => format!("/++ {} ++/", group.join(", ")),
            GhostKind::Inverse => format!("/-- {} --/", group.join(", ")),
        });
        i = j;
    }
    let mut s = format!("{{{}", parts.join(", "));
    for (c, _) in &o.dom {
        s.push_str(" & ");
        s.push_str(&match c {
            DomClause::Assume { name, fml } => format!("{}({})", fact_head('?', name), formula(fml)),
            DomClause::Assert { name, fml, using, method } => assertion(name, fml, using, method),
            DomClause::Duration { name, var, rhs } => format!("{}({} := {})", fact_head('?', name), var, term(rhs)),
        });
    }
    s.push('}');
    s
}

pub struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn block(&mut self, open: &str, body: &[Stmt], close: &str) {
        self.line(open);
        self.indent += 1;
        self.stmts(body);
        self.indent -= 1;
        self.line(close);
    }

    fn stmts(&mut self, ss: &[Stmt]) {
        for s in ss {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Assume { .. } | StmtKind::Assert { .. } | StmtKind::Assign { .. } => {
                let h = head(s);
                self.line(&format!("{};", h));
            }
            StmtKind::Ode(o) => self.line(&format!("{};", ode(o))),
            StmtKind::Loop(body) => self.block("{", body, "}*"),
            StmtKind::For(fl) => {
                let open = format!(
                    "for ({}; {}; {}; {}) {{",
                    head(&fl.init),
                    head(&fl.inv),
                    head(&fl.guard),
                    head(&fl.update)
                );
                self.block(&open, &fl.body, "}");
            }
            StmtKind::Switch { scrutinee, cases } => {
                let open = match scrutinee {
                    Some(pt) => format!("switch ({}) {{", proof_term(pt)),
                    None => "switch {".to_string(),
                };
                self.line(&open);
                self.indent += 1;
                for c in cases {
                    let nm = c.name.as_ref().map(|n| format!("{}:", n)).unwrap_or_default();
                    self.line(&format!("case {}({}) =>", nm, formula(&c.guard)));
                    self.indent += 1;
                    self.stmts(&c.body);
                    self.indent -= 1;
                }
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::Choice(branches) => {
                self.line("{");
                self.indent += 1;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        self.line("++");
                    }
                    self.stmts(b);
                }
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::Note { name, pt } => self.line(&format!("note {} = {};", name, proof_term(pt))),
            StmtKind::Let(d) => self.line(&def(d)),
            StmtKind::Ghost(body) => self.block("/++", body, "++/"),
            StmtKind::InverseGhost(body) => self.block("/--", body, "--/"),
            StmtKind::Label { name, params } => {
                if params.is_empty() {
                    self.line(&format!("{}:", name));
                } else {
                    self.line(&format!("{}({}):", name, params.join(", ")));
                }
            }
            StmtKind::Print(e) => self.line(&format!("print({});", expr(e))),
            StmtKind::Block(body) => self.block("{", body, "}"),
        }
    }
}

pub fn def(d: &Def) -> String {
    match d {
        Def::Term { name, params, body } => format!("let {}({}) = {};", name, params.join(", "), term(body)),
        Def::Formula { name, params, body } => format!("let {}({}) <-> {};", name, params.join(", "), formula(body)),
        Def::Game { name, body } => format!("let {} ::= {};", name, game(body)),
    }
}

pub fn stmts(ss: &[Stmt]) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    p.stmts(ss);
    p.out
}

pub fn document(doc: &Document) -> String {
    let mut out = stmts(&doc.stmts);
    for c in &doc.commands {
        match c {
            Command::Conclusion { name, with: None, .. } => {
                let _ = writeln!(out, "conclusion {};", name);
            }
            Command::Conclusion { name, with: Some(ns), .. } => {
                let _ = writeln!(out, "conclusion {} with ({});", name, ns.join(", "));
            }
            Command::Proves { name, target, .. } => {
                let _ = writeln!(out, "proves {} \"{}\";", name, formula(target));
            }
        }
    }
    out
}

//! SMT-LIB export of arithmetic goals and invocation of an external solver.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_traits::Signed;

use crate::ast::{Cmp, Formula, Rat, Term, Var};
use crate::vars::VarSet;

/// Environment variable consulted when no solver is given on the command line.
pub const SOLVER_ENV: &str = "KAISAR_SOLVER";

fn sym(x: &Var) -> String {
    format!("|{}|", x)
}

fn num(r: &Rat) -> String {
    let n = r.numer().abs().to_string();
    let body = if r.is_integer() { format!("{}.0", n) } else { format!("(/ {}.0 {}.0)", n, r.denom()) };
    if r.is_negative() {
        format!("(- {})", body)
    } else {
        body
    }
}

pub fn term(t: &Term) -> String {
    match t {
        Term::Num(r) => num(r),
        Term::Var(x) => sym(x),
        Term::Neg(a) => format!("(- {})", term(a)),
        Term::Add(a, b) => format!("(+ {} {})", term(a), term(b)),
        Term::Sub(a, b) => format!("(- {} {})", term(a), term(b)),
        Term::Mul(a, b) => format!("(* {} {})", term(a), term(b)),
        Term::Div(a, b) => format!("(/ {} {})", term(a), term(b)),
        Term::Pow(a, e) => {
            let k: i64 = if e.is_integer() { e.to_integer().try_into().unwrap_or(0) } else { 0 };
            let base = term(a);
            let pos = match k.unsigned_abs() {
                0 => "1.0".to_string(),
                1 => base.clone(),
                n => format!("(* {})", vec![base.as_str(); n as usize].join(" ")),
            };
            if k < 0 {
                format!("(/ 1.0 {})", pos)
            } else {
                pos
            }
        }
        Term::Min(a, b) => {
            let (a, b) = (term(a), term(b));
            format!("(ite (<= {a} {b}) {a} {b})")
        }
        Term::Max(a, b) => {
            let (a, b) = (term(a), term(b));
            format!("(ite (>= {a} {b}) {a} {b})")
        }
        // applications and located terms are expanded before export
        Term::App(f, _) => format!("|{}|", f),
        Term::At(a, _) => term(a),
    }
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Cmp(Cmp::Ne, a, b) => format!("(distinct {} {})", term(a), term(b)),
        Formula::Cmp(op, a, b) => format!("({} {} {})", op.symbol(), term(a), term(b)),
        Formula::Not(a) => format!("(not {})", formula(a)),
        Formula::And(a, b) => format!("(and {} {})", formula(a), formula(b)),
        Formula::Or(a, b) => format!("(or {} {})", formula(a), formula(b)),
        Formula::Imply(a, b) => format!("(=> {} {})", formula(a), formula(b)),
        Formula::Iff(a, b) => format!("(= {} {})", formula(a), formula(b)),
        Formula::Forall(x, a) => format!("(forall (({} Real)) {})", sym(x), formula(a)),
        Formula::Exists(x, a) => format!("(exists (({} Real)) {})", sym(x), formula(a)),
        Formula::At(a, _) => formula(a),
        Formula::Box(..) | Formula::Diamond(..) | Formula::Pred(..) => "false".into(),
    }
}

fn quantified(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => true,
        Formula::Not(a) | Formula::At(a, _) => quantified(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Iff(a, b) => {
            quantified(a) || quantified(b)
        }
        _ => false,
    }
}

/// Script whose `unsat` answer means the goal is valid.
pub fn script(hyps: &[Formula], concl: &Formula, comment: &str) -> String {
    let mut vars = VarSet::new();
    for h in hyps {
        vars.extend(h.free_vars());
    }
    vars.extend(concl.free_vars());
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "; {}", line);
    }
    let logic = if hyps.iter().any(quantified) || quantified(concl) { "NRA" } else { "QF_NRA" };
    let _ = writeln!(out, "(set-logic {})", logic);
    for x in &vars {
        let _ = writeln!(out, "(declare-fun {} () Real)", sym(x));
    }
    for h in hyps {
        let _ = writeln!(out, "(assert {})", formula(h));
    }
    let _ = writeln!(out, "(assert (not {}))", formula(concl));
    let _ = writeln!(out, "(check-sat)");
    out
}

/// Write the script under `dir`, named after `label` and the content hash.
pub fn export(dir: &Path, label: &str, script: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut h = DefaultHasher::new();
    script.hash(&mut h);
    let clean: String =
        label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    let path = dir.join(format!("{}-{:016x}.smt2", clean, h.finish()));
    std::fs::write(&path, script)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat,
    Unsat,
    Unknown(String),
}

/// Run `solver <file>` and read its first answer line.
pub fn run_solver(solver: &Path, file: &Path, timeout: Duration) -> SolverAnswer {
    let child = Command::new(solver).arg(file).stdout(Stdio::piped()).stderr(Stdio::null()).spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return SolverAnswer::Unknown(format!("cannot run solver `{}`: {}", solver.display(), e)),
    };
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() > timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return SolverAnswer::Unknown(format!("solver timed out after {}s", timeout.as_secs()));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
            Err(e) => return SolverAnswer::Unknown(e.to_string()),
        }
    }
    let mut out = String::new();
    if let Some(mut s) = child.stdout.take() {
        let _ = s.read_to_string(&mut out);
    }
    match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("unsat") => SolverAnswer::Unsat,
        Some("sat") => SolverAnswer::Sat,
        Some(other) => SolverAnswer::Unknown(format!("solver answered `{}`", other)),
        None => SolverAnswer::Unknown("solver produced no answer".into()),
    }
}

/// Solver from the environment variable, if set and nonempty.
pub fn solver_from_env() -> Option<PathBuf> {
    std::env::var_os(SOLVER_ENV).filter(|s| !s.is_empty()).map(PathBuf::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_term};

    #[test]
    fn rationals_and_powers() {
        assert_eq!(term(&parse_term("-1/2").unwrap()), "(- (/ 1.0 2.0))");
        assert_eq!(term(&parse_term("x^3").unwrap()), "(* |x| |x| |x|)");
    }

    #[test]
    fn script_negates_conclusion() {
        let s = script(&[parse_formula("x > 0").unwrap()], &parse_formula("x*x > 0").unwrap(), "goal");
        assert!(s.contains("(assert (not (> (* |x| |x|) 0.0)))"));
        assert!(s.contains("(declare-fun |x| () Real)"));
        assert!(s.starts_with("; goal\n(set-logic QF_NRA)"));
    }
}

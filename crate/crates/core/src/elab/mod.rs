//! Static single assignment elaboration and label resolution.
//!
//! Every assignment creates a fresh variant `x_i` of its variable and every
//! read refers to the current variant. Located expressions `e@l(args)` are
//! lifted out as placeholders during renaming and resolved afterwards, once
//! every label and variant definition in the document is known.

mod resolve;
mod ssa;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::ast::*;
use crate::defs::Defs;
use crate::ode::Solution;
use crate::printer;
use crate::span::{Diagnostic, Span};

pub use ssa::elaborate;

/// Enclosing constructs of a program point, outermost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    Branch { choice: usize, branch: usize },
    Loop(usize),
}

/// How a variant got its value.
#[derive(Clone, Debug, PartialEq)]
pub enum VarDef {
    Init,
    Assign(Term),
    Random,
    /// Join of a choice; `sources[b]` is the variant at the end of branch `b`.
    Merge { choice: usize, sources: Vec<Var> },
    /// Value at the start of an arbitrary iteration of loop `id`.
    LoopMerge { id: usize, pre: Var },
    /// State at the end of ODE `ode`.
    OdeExit { ode: usize },
    /// Duration of ODE `ode`.
    Duration { ode: usize },
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub def: VarDef,
    /// Position in document order; variants are usable only after it.
    pub seq: usize,
    pub scope: Vec<Scope>,
    /// Defined inside an inverse ghost, so unusable by plain proofs.
    pub inverse: bool,
}

#[derive(Clone, Debug)]
pub struct LabelInfo {
    pub name: String,
    pub params: Vec<String>,
    pub snapshot: BTreeMap<String, u32>,
    pub seq: usize,
    pub scope: Vec<Scope>,
    pub span: Span,
}

impl LabelInfo {
    pub fn variant(&self, base: &str) -> Var {
        Var::ssa(base, self.snapshot.get(base).copied().unwrap_or(0))
    }
}

#[derive(Clone, Debug)]
pub struct OdeInfo {
    /// Exit variant to the variant current before the ODE.
    pub pre: BTreeMap<Var, Var>,
    pub dur: Var,
    /// Polynomial solution over the non-inverse-ghost equations.
    pub solution: Option<Solution>,
    /// Exit variant of a variable with derivative 1.
    pub clock: Option<Var>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IEq {
    pub name: Option<String>,
    pub pre: Var,
    pub var: Var,
    pub rhs: Term,
    pub ghost: GhostKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IDom {
    Assume { name: Option<String>, fml: Formula },
    Assert { name: Option<String>, fml: Formula, using: Option<Vec<ProofTerm>>, method: Option<Method> },
    Duration { name: Option<String>, var: Var, rhs: Term },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IOde {
    pub id: usize,
    pub eqs: Vec<IEq>,
    pub dom: Vec<(IDom, Span)>,
    pub dur: Var,
    pub angelic: bool,
}

/// A variable assigned in a loop: its value before the loop, at the start
/// of an arbitrary iteration, and at the end of the body.
#[derive(Clone, Debug, PartialEq)]
pub struct Carried {
    pub pre: Var,
    pub merge: Var,
    pub end: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Merge {
    pub var: Var,
    pub sources: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ICase {
    pub name: Option<String>,
    pub guard: Formula,
    pub body: Vec<IStmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IFor {
    pub id: usize,
    pub init: IStmt,
    pub inv: IStmt,
    pub guard: IStmt,
    pub carried: Vec<Carried>,
    pub body: Vec<IStmt>,
    pub update: IStmt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IKind {
    Assume { name: Option<String>, fml: Formula },
    Assert { name: Option<String>, fml: Formula, using: Option<Vec<ProofTerm>>, method: Option<Method> },
    Assign { name: Option<String>, fact: bool, var: Var, rhs: Option<Term> },
    Ode(IOde),
    Loop { id: usize, carried: Vec<Carried>, body: Vec<IStmt> },
    For(Box<IFor>),
    Switch { choice: usize, scrutinee: Option<ProofTerm>, cases: Vec<ICase>, merges: Vec<Merge> },
    Choice { choice: usize, branches: Vec<Vec<IStmt>>, merges: Vec<Merge> },
    Note { name: String, pt: ProofTerm },
    Ghost(Vec<IStmt>),
    InverseGhost(Vec<IStmt>),
    Label(String),
    Print(Expr),
    Block(Vec<IStmt>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IStmt {
    pub kind: IKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Elaborated {
    pub stmts: Vec<IStmt>,
    pub vars: BTreeMap<Var, VarInfo>,
    pub labels: BTreeMap<String, LabelInfo>,
    pub odes: Vec<OdeInfo>,
    /// Definitions in force at the end of the document.
    pub defs: Defs,
    /// Variables assigned in forward ghosts and inverse ghosts.
    pub ghost_vars: Vec<String>,
    pub inverse_vars: Vec<String>,
    pub warnings: Vec<Diagnostic>,
    /// Current variant index of each base name at the end of the document.
    pub current: BTreeMap<String, u32>,
    /// Resolution of each located-expression placeholder.
    pub located: Vec<Expr>,
    /// Fact formulas with their located expressions still as placeholders.
    pub raw: BTreeMap<usize, Formula>,
}

impl Elaborated {
    pub fn def(&self, x: &Var) -> &VarDef {
        self.vars.get(x).map(|i| &i.def).unwrap_or(&VarDef::Init)
    }

    pub fn is_ghost(&self, base: &str) -> bool {
        self.ghost_vars.iter().any(|g| g == base)
    }

    pub fn is_inverse(&self, base: &str) -> bool {
        self.inverse_vars.iter().any(|g| g == base)
    }

    /// Whether this particular variant was defined inside an inverse ghost.
    pub fn is_inverse_variant(&self, x: &Var) -> bool {
        self.vars.get(x).map(|i| i.inverse).unwrap_or(false)
    }

    /// Replace located-expression placeholders by their resolutions.
    pub fn fill(&self, f: &Formula) -> Formula {
        resolve::fill_formula(f, &self.located)
    }

    pub fn is_current(&self, x: &Var) -> bool {
        x.idx.unwrap_or(0) == self.current.get(&x.name).copied().unwrap_or(0)
    }

    /// Text form of the SSA program, for debugging and golden tests.
    pub fn dump_ssa(&self) -> String {
        let mut out = String::new();
        dump(&self.stmts, 0, &mut out);
        out
    }

    pub fn dump_labels(&self) -> String {
        let mut out = String::new();
        let mut labels: Vec<&LabelInfo> = self.labels.values().collect();
        labels.sort_by_key(|l| l.seq);
        for l in labels {
            let snap: Vec<String> = l.snapshot.iter().map(|(x, i)| format!("{}_{}", x, i)).collect();
            let _ = writeln!(out, "{}({}): {}", l.name, l.params.join(", "), snap.join(" "));
        }
        out
    }
}

fn name_prefix(name: &Option<String>) -> String {
    name.as_ref().map(|n| format!("{}:", n)).unwrap_or_default()
}

fn dump(stmts: &[IStmt], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for s in stmts {
        match &s.kind {
            IKind::Assume { name, fml } => {
                let _ = writeln!(out, "{}?{}({});", pad, name_prefix(name), printer::formula(fml));
            }
            IKind::Assert { name, fml, .. } => {
                let _ = writeln!(out, "{}!{}({});", pad, name_prefix(name), printer::formula(fml));
            }
            IKind::Assign { name, var, rhs, .. } => {
                let rhs = rhs.as_ref().map(printer::term).unwrap_or_else(|| "*".into());
                let _ = writeln!(out, "{}{}{} := {};", pad, name_prefix(name), var, rhs);
            }
            IKind::Ode(o) => {
                let eqs: Vec<String> = o
                    .eqs
                    .iter()
                    .map(|e| format!("{}' = {} [from {}]", e.var, printer::term(&e.rhs), e.pre))
                    .collect();
                let _ = writeln!(out, "{}{{{}}} for {}", pad, eqs.join(", "), o.dur);
                for (d, _) in &o.dom {
                    let line = match d {
                        IDom::Assume { name, fml } => format!("?{}({})", name_prefix(name), printer::formula(fml)),
                        IDom::Assert { name, fml, .. } => format!("!{}({})", name_prefix(name), printer::formula(fml)),
                        IDom::Duration { name, var, rhs } => {
                            format!("?{}({} := {})", name_prefix(name), var, printer::term(rhs))
                        }
                    };
                    let _ = writeln!(out, "{}  & {}", pad, line);
                }
            }
            IKind::Loop { carried, body, .. } => {
                let _ = writeln!(out, "{}loop {} {{", pad, carried_str(carried));
                dump(body, depth + 1, out);
                let _ = writeln!(out, "{}}}*", pad);
            }
            IKind::For(f) => {
                let _ = writeln!(out, "{}for {} {{", pad, carried_str(&f.carried));
                dump(std::slice::from_ref(&f.init), depth + 1, out);
                dump(std::slice::from_ref(&f.inv), depth + 1, out);
                dump(std::slice::from_ref(&f.guard), depth + 1, out);
                dump(&f.body, depth + 1, out);
                dump(std::slice::from_ref(&f.update), depth + 1, out);
                let _ = writeln!(out, "{}}}", pad);
            }
            IKind::Switch { cases, merges, .. } => {
                let _ = writeln!(out, "{}switch {{", pad);
                for c in cases {
                    let _ = writeln!(out, "{}  case {} =>", pad, printer::formula(&c.guard));
                    dump(&c.body, depth + 2, out);
                }
                let _ = writeln!(out, "{}}} {}", pad, merges_str(merges));
            }
            IKind::Choice { branches, merges, .. } => {
                for (i, b) in branches.iter().enumerate() {
                    let _ = writeln!(out, "{}{}{{", pad, if i == 0 { "" } else { "++ " });
                    dump(b, depth + 1, out);
                    let _ = writeln!(out, "{}}}", pad);
                }
                let _ = writeln!(out, "{}{}", pad, merges_str(merges));
            }
            IKind::Note { name, pt } => {
                let _ = writeln!(out, "{}note {} = {:?};", pad, name, pt);
            }
            IKind::Ghost(b) | IKind::InverseGhost(b) => {
                let (l, r) = if matches!(s.kind, IKind::Ghost(_)) { ("/++", "++/") } else { ("/--", "--/") };
                let _ = writeln!(out, "{}{}", pad, l);
                dump(b, depth + 1, out);
                let _ = writeln!(out, "{}{}", pad, r);
            }
            IKind::Label(n) => {
                let _ = writeln!(out, "{}{}:", pad, n);
            }
            IKind::Print(e) => {
                let _ = writeln!(out, "{}print({});", pad, printer::expr(e));
            }
            IKind::Block(b) => {
                let _ = writeln!(out, "{}{{", pad);
                dump(b, depth + 1, out);
                let _ = writeln!(out, "{}}}", pad);
            }
        }
    }
}

fn carried_str(c: &[Carried]) -> String {
    let parts: Vec<String> = c.iter().map(|c| format!("{}<-{}|{}", c.merge, c.pre, c.end)).collect();
    format!("[{}]", parts.join(" "))
}

fn merges_str(m: &[Merge]) -> String {
    let parts: Vec<String> = m
        .iter()
        .map(|m| {
            let srcs: Vec<String> = m.sources.iter().map(|v| v.to_string()).collect();
            format!("{} = merge({})", m.var, srcs.join(", "))
        })
        .collect();
    parts.join("; ")
}

/// Fold variants back to their base names.
pub fn unssa_term(t: &Term) -> Term {
    t.map_vars(&mut |v| v.idx.map(|_| Term::Var(v.base())))
}

pub fn unssa_formula(f: &Formula) -> Formula {
    f.map_terms(&mut unssa_term)
}

#[cfg(test)]
mod tests;

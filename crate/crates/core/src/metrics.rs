//! Line counts of a proof document: model lines (statements that belong to
//! the game), proof lines (assertions, notes, ghosts, labels) and lines with
//! `using` clauses. A line holding both kinds counts in both columns.

use std::collections::BTreeSet;

use crate::ast::*;
use crate::span::Span;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub lines: usize,
    pub model: usize,
    pub proof: usize,
    pub using: usize,
}

struct Counter<'s> {
    src: &'s str,
    model: BTreeSet<u32>,
    proof: BTreeSet<u32>,
}

impl<'s> Counter<'s> {
    fn lines(&self, span: Span) -> std::ops::RangeInclusive<u32> {
        let extra = self.src.get(span.start..span.end).map(|t| t.matches('\n').count()).unwrap_or(0) as u32;
        span.line..=span.line + extra
    }

    fn mark(&mut self, span: Span, model: bool) {
        let lines = self.lines(span);
        let set = if model { &mut self.model } else { &mut self.proof };
        set.extend(lines);
    }

    fn head(&mut self, span: Span) {
        self.model.insert(span.line);
    }

    fn stmts(&mut self, ss: &[Stmt], ghost: bool) {
        for s in ss {
            self.stmt(s, ghost);
        }
    }

    fn stmt(&mut self, s: &Stmt, ghost: bool) {
        let span = s.span;
        if ghost {
            self.mark(span, false);
            return;
        }
        match &s.kind {
            StmtKind::Assume { .. } | StmtKind::Assign { .. } | StmtKind::Let(_) => self.mark(span, true),
            StmtKind::Assert { .. }
            | StmtKind::Note { .. }
            | StmtKind::Label { .. }
            | StmtKind::Print(_) => self.mark(span, false),
            StmtKind::Ode(o) => {
                self.head(span);
                for (c, sp) in &o.dom {
                    self.mark(*sp, !matches!(c, DomClause::Assert { .. }));
                }
            }
            StmtKind::Loop(b) | StmtKind::Block(b) => {
                self.head(span);
                self.stmts(b, false);
            }
            StmtKind::For(f) => {
                self.head(span);
                self.stmt(&f.init, false);
                self.stmt(&f.inv, false);
                self.stmt(&f.guard, false);
                self.stmt(&f.update, false);
                self.stmts(&f.body, false);
            }
            StmtKind::Switch { cases, .. } => {
                self.head(span);
                for c in cases {
                    self.head(c.span);
                    self.stmts(&c.body, false);
                }
            }
            StmtKind::Choice(bs) => {
                self.head(span);
                bs.iter().for_each(|b| self.stmts(b, false));
            }
            StmtKind::Ghost(b) => {
                self.mark(span, false);
                self.stmts(b, true);
            }
            StmtKind::InverseGhost(b) => {
                self.head(span);
                self.stmts(b, false);
            }
        }
    }
}

pub fn measure(doc: &Document, src: &str) -> Metrics {
    let mut c = Counter { src, model: BTreeSet::new(), proof: BTreeSet::new() };
    c.stmts(&doc.stmts, false);
    let using = src.lines().filter(|l| l.split(|ch: char| !ch.is_alphanumeric()).any(|w| w == "using")).count();
    Metrics {
        lines: src.lines().filter(|l| !l.trim().is_empty()).count(),
        model: c.model.len(),
        proof: c.proof.len(),
        using,
    }
}

//! Game reification: the game a checked strategy plays, and the box
//! theorem `[α]φ` it proves.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::check::{Fact, Origin, Status};
use crate::elab::{unssa_formula, unssa_term, Elaborated, IDom, IKind, IOde, IStmt};
use crate::printer;
use crate::span::{Diagnostic, Span};
use crate::vars::Subst;

#[derive(Clone, Debug, PartialEq)]
pub struct Conclusion {
    pub game: Game,
    pub post: Formula,
}

impl Conclusion {
    pub fn formula(&self) -> Formula {
        Formula::Box(Box::new(self.game.clone()), Box::new(self.post.clone()))
    }

    pub fn render(&self) -> String {
        printer::formula(&self.formula())
    }
}

/// Sequence of games, with the empty sequence as `?true`.
pub fn seq(mut gs: Vec<Game>) -> Game {
    match gs.len() {
        0 => Game::Test(Formula::True),
        1 => gs.pop().unwrap(),
        _ => Game::Seq(gs),
    }
}

fn choice(mut gs: Vec<Game>) -> Game {
    let last = gs.pop().unwrap_or(Game::Test(Formula::True));
    gs.into_iter().rev().fold(last, |acc, g| Game::Choice(Box::new(g), Box::new(acc)))
}

fn dual(g: Game) -> Game {
    Game::Dual(Box::new(g))
}

struct Reifier<'a> {
    el: &'a Elaborated,
    /// Current variant of every base name at the point being reified.
    cur: BTreeMap<String, u32>,
    /// Inside a forward ghost: only track state, emit nothing.
    erase: bool,
    /// First pass: record which earlier-state variants the game must keep.
    collect: bool,
    needed: BTreeSet<Var>,
    /// Game variable holding the value of each needed variant.
    snap: BTreeMap<Var, Var>,
    /// Snapshot assignments owed after the statement being reified.
    pending: Vec<Game>,
}

type R<T> = Result<T, Diagnostic>;

impl<'a> Reifier<'a> {
    fn new(el: &'a Elaborated) -> Reifier<'a> {
        Reifier {
            el,
            cur: BTreeMap::new(),
            erase: false,
            collect: false,
            needed: BTreeSet::new(),
            snap: BTreeMap::new(),
            pending: Vec::new(),
        }
    }

    fn is_cur(&self, v: &Var) -> bool {
        v.idx.unwrap_or(0) == self.cur.get(&v.name).copied().unwrap_or(0)
    }

    fn set(&mut self, v: &Var) {
        self.cur.insert(v.name.clone(), v.idx.unwrap_or(0));
        if let Some(s) = self.snap.get(v) {
            self.pending.push(Game::Assign(s.clone(), Term::Var(v.base())));
        }
    }

    fn stale<'f>(&self, vs: impl IntoIterator<Item = &'f Var>) -> Option<&'f Var> {
        vs.into_iter().find(|v| !self.is_cur(v))
    }

    /// Route references to earlier states through their snapshots.
    fn snapshot(&mut self, vs: &BTreeSet<Var>, span: Span) -> R<Subst> {
        let mut sub = Subst::new();
        let stale: Vec<&Var> = vs.iter().filter(|v| !self.is_cur(v)).collect();
        for v in stale {
            if self.collect {
                self.needed.insert(v.clone());
                continue;
            }
            let Some(s) = self.snap.get(v) else {
                return Err(Diagnostic::error(span, format!("cannot reify a reference to `{}` from an earlier state", v.name)));
            };
            sub.insert(v.clone(), Term::Var(s.clone()));
        }
        Ok(sub)
    }

    fn term(&mut self, t: &Term, span: Span) -> R<Term> {
        let sub = self.snapshot(&t.free_vars(), span)?;
        Ok(unssa_term(&t.subst(&sub)))
    }

    fn assumption(&mut self, f: &Formula, span: Span) -> R<Formula> {
        let sub = self.snapshot(&f.free_vars(), span)?;
        Ok(unssa_formula(&f.map_terms(&mut |t| t.subst(&sub))))
    }

    /// Angel's obligations may be weakened: conjuncts about earlier states
    /// or ghost variables are dropped.
    fn assertion(&self, f: &Formula) -> Formula {
        let keep: Vec<Formula> = f
            .conjuncts()
            .into_iter()
            .filter(|c| {
                let vs = c.free_vars();
                self.stale(&vs).is_none() && !vs.iter().any(|v| self.el.is_ghost(&v.name))
            })
            .map(unssa_formula)
            .collect();
        Formula::conj(keep)
    }

    /// Push a reified statement followed by the snapshots it owes.
    fn emit(&mut self, out: &mut Vec<Game>, g: Option<Game>) {
        out.extend(g);
        let pending = std::mem::take(&mut self.pending);
        if !self.erase {
            out.extend(pending);
        }
    }

    fn block(&mut self, ss: &[IStmt]) -> R<Vec<Game>> {
        let mut out = Vec::new();
        for s in ss {
            let g = self.stmt(s)?;
            self.emit(&mut out, g);
        }
        Ok(out)
    }

    fn stmt(&mut self, s: &IStmt) -> R<Option<Game>> {
        let span = s.span;
        let g = match &s.kind {
            IKind::Assume { fml, .. } => {
                if self.erase {
                    return Ok(None);
                }
                Game::Test(self.assumption(fml, span)?)
            }
            IKind::Assert { fml, .. } => match self.assertion(fml) {
                _ if self.erase => return Ok(None),
                Formula::True => return Ok(None),
                f => dual(Game::Test(f)),
            },
            IKind::Assign { var, rhs, .. } => {
                let rhs = match rhs {
                    Some(t) if !self.erase => Some(self.term(t, span)?),
                    _ => None,
                };
                self.set(var);
                if self.erase {
                    return Ok(None);
                }
                match rhs {
                    Some(t) => Game::Assign(var.base(), t),
                    None => Game::Random(var.base()),
                }
            }
            IKind::Ode(o) => return self.ode(o, span),
            IKind::Loop { carried, body, .. } => {
                for c in carried {
                    self.set(&c.merge);
                }
                let mut games = Vec::new();
                self.emit(&mut games, None);
                games.extend(self.block(body)?);
                for c in carried {
                    self.set(&c.merge);
                }
                if self.erase {
                    return Ok(None);
                }
                Game::Repeat(Box::new(seq(games)))
            }
            IKind::For(f) => {
                let mut pre = Vec::new();
                let g = self.stmt(&f.init)?;
                self.emit(&mut pre, g);
                let g = self.stmt(&f.inv)?;
                self.emit(&mut pre, g);
                for c in &f.carried {
                    self.set(&c.merge);
                }
                let mut body = Vec::new();
                self.emit(&mut body, None);
                let g = self.stmt(&f.guard)?;
                self.emit(&mut body, g);
                body.extend(self.block(&f.body)?);
                let g = self.stmt(&f.update)?;
                self.emit(&mut body, g);
                for c in &f.carried {
                    self.set(&c.merge);
                }
                if self.erase {
                    return Ok(None);
                }
                pre.push(dual(Game::Repeat(Box::new(dual(seq(body))))));
                seq(pre)
            }
            IKind::Switch { cases, merges, .. } => {
                let start = self.cur.clone();
                let mut arms = Vec::new();
                for c in cases {
                    self.cur = start.clone();
                    let mut arm = Vec::new();
                    if c.guard != Formula::True {
                        arm.push(Game::Test(self.assumption(&c.guard, c.span)?));
                    }
                    arm.push(dual(seq(self.block(&c.body)?)));
                    arms.push(seq(arm));
                }
                self.cur = start;
                for m in merges {
                    self.set(&m.var);
                }
                if self.erase {
                    return Ok(None);
                }
                dual(choice(arms))
            }
            IKind::Choice { branches, merges, .. } => {
                let start = self.cur.clone();
                let mut arms = Vec::new();
                for b in branches {
                    self.cur = start.clone();
                    arms.push(seq(self.block(b)?));
                }
                self.cur = start;
                for m in merges {
                    self.set(&m.var);
                }
                if self.erase {
                    return Ok(None);
                }
                choice(arms)
            }
            IKind::Ghost(b) => {
                let saved = self.erase;
                self.erase = true;
                self.block(b)?;
                self.erase = saved;
                return Ok(None);
            }
            IKind::InverseGhost(b) | IKind::Block(b) => {
                let gs = self.block(b)?;
                if self.erase || gs.is_empty() {
                    return Ok(None);
                }
                seq(gs)
            }
            IKind::Note { .. } | IKind::Label(_) | IKind::Print(_) => return Ok(None),
        };
        Ok(Some(g))
    }

    fn ode(&mut self, o: &IOde, span: Span) -> R<Option<Game>> {
        for e in &o.eqs {
            self.set(&e.var);
        }
        if self.erase {
            return Ok(None);
        }
        let mut eqs = Vec::new();
        for e in o.eqs.iter().filter(|e| e.ghost != GhostKind::Forward) {
            eqs.push((e.var.base(), self.term(&e.rhs, span)?));
        }
        let mut dom = Vec::new();
        for (d, sp) in &o.dom {
            match d {
                IDom::Assume { fml, .. } if !o.angelic => dom.push(self.assumption(fml, *sp)?),
                IDom::Assert { fml, .. } if o.angelic => dom.push(self.assertion(fml)),
                _ => {}
            }
        }
        let dom: Vec<Formula> = dom.into_iter().filter(|f| *f != Formula::True).collect();
        let g = Game::Ode(eqs, Formula::conj(dom));
        Ok(Some(if o.angelic { dual(g) } else { g }))
    }

    /// Whole document: a first pass finds the earlier-state values the game
    /// refers to, the second keeps each in a fresh variable.
    fn document(&mut self) -> R<Vec<Game>> {
        self.collect = true;
        self.block(&self.el.stmts)?;
        self.collect = false;
        self.cur.clear();
        self.pending.clear();
        let taken: BTreeSet<String> = self.el.vars.keys().map(|v| v.name.clone()).collect();
        for v in std::mem::take(&mut self.needed) {
            let mut name = format!("{}_{}", v.name, v.idx.unwrap_or(0));
            while taken.contains(&name) || self.snap.values().any(|s| s.name == name) {
                name.push('_');
            }
            self.snap.insert(v, Var::new(&name));
        }
        let mut out = Vec::new();
        for (v, s) in &self.snap {
            if v.idx.unwrap_or(0) == 0 {
                out.push(Game::Assign(s.clone(), Term::Var(v.base())));
            }
        }
        out.extend(self.block(&self.el.stmts)?);
        Ok(out)
    }
}

/// Facts eligible for the postcondition: proven at top level, not ghosts,
/// and about the final state only.
fn exported(el: &Elaborated, f: &Fact) -> bool {
    f.top
        && f.origin == Origin::Proved
        && f.status == Status::Plain
        && f.fml.free_vars().iter().all(|v| el.is_current(v) && !v.name.starts_with('_'))
}

/// Reify a checked document. `with` restricts the postcondition to the
/// named facts.
pub fn reify(el: &Elaborated, facts: &[Fact], with: Option<&[String]>, span: Span) -> Result<Conclusion, Diagnostic> {
    let mut r = Reifier::new(el);
    let mut body = r.document()?;
    // [α; ?f^d]ψ is [α](f ∧ ψ): trailing Angelic tests join the postcondition
    let mut trailing = Vec::new();
    while let Some(Game::Dual(g)) = body.last() {
        let Game::Test(f) = &**g else { break };
        trailing.push(f.clone());
        body.pop();
    }
    let game = seq(body);
    let mut post: Vec<Formula> = Vec::new();
    let mut add = |f: Formula| {
        if !post.contains(&f) {
            post.push(f);
        }
    };
    match with {
        None => {
            for f in facts.iter().filter(|f| exported(r.el, f)) {
                add(unssa_formula(&f.fml));
            }
        }
        Some(names) => {
            for n in names {
                let Some(f) = facts.iter().rev().find(|f| f.name == *n) else {
                    return Err(Diagnostic::error(span, format!("unknown fact `{}`", n)));
                };
                if !exported(r.el, f) {
                    return Err(Diagnostic::error(
                        span,
                        format!("`{}` is not a proven top-level fact about the final state", n),
                    ));
                }
                add(unssa_formula(&f.fml));
            }
        }
    }
    for f in trailing.into_iter().rev() {
        if !post.contains(&f) {
            post.push(f);
        }
    }
    Ok(Conclusion { game, post: Formula::conj(post) })
}

//! Proof statements.

use super::{PResult, Parser, METHODS};
use crate::ast::*;
use crate::lexer::Tok;
use crate::span::{Diagnostic, Span};

impl Parser {
    pub(super) fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Quest => {
                let k = self.assume_like()?;
                self.expect(&Tok::Semi)?;
                k
            }
            Tok::Bang => {
                let k = self.assert_like()?;
                self.expect(&Tok::Semi)?;
                k
            }
            Tok::LBrace => return self.brace_stmt(),
            Tok::GhostOpen | Tok::InvOpen => {
                let inverse = self.bump() == Tok::InvOpen;
                let close = if inverse { Tok::InvClose } else { Tok::GhostClose };
                let body = self.stmts_until(&[close.clone()])?;
                if !self.eat(&close) {
                    let kind = if inverse { "inverse ghost `/--`" } else { "ghost `/++`" };
                    return Err(Diagnostic::error(start, format!("unterminated {}; expected `{}`", kind, close.text())));
                }
                if inverse {
                    StmtKind::InverseGhost(body)
                } else {
                    StmtKind::Ghost(body)
                }
            }
            Tok::Ident(kw) if kw == "let" => self.let_stmt()?,
            Tok::Ident(kw) if kw == "note" => {
                self.bump();
                let name = self.ident()?;
                self.expect(&Tok::Eq)?;
                let pt = self.proof_term()?;
                self.expect(&Tok::Semi)?;
                StmtKind::Note { name, pt }
            }
            Tok::Ident(kw) if kw == "print" => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let e = self.expr_any()?;
                self.expect(&Tok::RParen)?;
                self.expect(&Tok::Semi)?;
                StmtKind::Print(e)
            }
            Tok::Ident(kw) if kw == "switch" => return self.switch_stmt(),
            Tok::Ident(kw) if kw == "for" => return self.for_stmt(),
            Tok::Ident(_) => {
                if self.peek_at(1) == &Tok::Assign {
                    let k = self.assignment()?;
                    self.expect(&Tok::Semi)?;
                    k
                } else if self.peek_at(1) == &Tok::Colon {
                    let name = self.ident()?;
                    self.bump();
                    StmtKind::Label { name, params: vec![] }
                } else if self.peek_at(1) == &Tok::LParen {
                    let name = self.ident()?;
                    self.bump();
                    let mut params = Vec::new();
                    while !self.at(&Tok::RParen) {
                        params.push(self.ident()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(&Tok::RParen)?;
                    if !self.eat(&Tok::Colon) {
                        return Err(self.error_expected("`:` after label parameters"));
                    }
                    StmtKind::Label { name, params }
                } else {
                    self.bump();
                    return Err(self.error_expected("`:=` or `:`"));
                }
            }
            _ => return Err(self.error_expected("statement")),
        };
        Ok(Stmt::new(kind, start.to(self.prev_span())))
    }

    /// Statements up to (not including) one of `stops`, a closing brace,
    /// `++`, `case`, or end of input.
    fn stmts_until(&mut self, stops: &[Tok]) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            let t = self.peek();
            if stops.contains(t)
                || matches!(t, Tok::RBrace | Tok::Choice | Tok::Eof | Tok::GhostClose | Tok::InvClose)
                || self.at_kw("case")
            {
                return Ok(out);
            }
            out.push(self.stmt()?);
        }
    }

    /// `x := f` or `x := *`, without the terminator.
    fn assignment(&mut self) -> PResult<StmtKind> {
        let x = self.ident()?;
        self.expect(&Tok::Assign)?;
        let rhs = if self.eat(&Tok::Star) { None } else { Some(self.term()?) };
        Ok(StmtKind::Assign { name: None, var: Var::new(x), rhs, fact: false })
    }

    /// `name:` prefix of a fact, if present.
    fn fact_name(&mut self) -> PResult<Option<String>> {
        if self.is_ident() && self.peek_at(1) == &Tok::Colon {
            let n = self.ident()?;
            self.bump();
            Ok(Some(n))
        } else {
            Ok(None)
        }
    }

    /// `?name:(φ)` or `?name:(x := f)`, without the terminator.
    fn assume_like(&mut self) -> PResult<StmtKind> {
        self.expect(&Tok::Quest)?;
        let name = self.fact_name()?;
        if self.at(&Tok::LParen) && self.is_ident_at(1) && self.peek_at(2) == &Tok::Assign {
            self.bump();
            let x = self.ident()?;
            self.bump();
            let rhs = self.term()?;
            self.expect(&Tok::RParen)?;
            return Ok(StmtKind::Assign { name, var: Var::new(x), rhs: Some(rhs), fact: true });
        }
        let fml = self.formula()?;
        Ok(StmtKind::Assume { name, fml })
    }

    /// `!name:(φ) using ... by m`, without the terminator.
    fn assert_like(&mut self) -> PResult<StmtKind> {
        self.expect(&Tok::Bang)?;
        let name = self.fact_name()?;
        let fml = self.formula()?;
        let (using, method) = self.using_by()?;
        Ok(StmtKind::Assert { name, fml, using, method })
    }

    fn using_by(&mut self) -> PResult<(Option<Vec<ProofTerm>>, Option<Method>)> {
        let mut using = None;
        if self.at_kw("using") {
            self.bump();
            let mut items = Vec::new();
            while !self.at_kw("by") && !matches!(self.peek(), Tok::Semi | Tok::RParen | Tok::Amp | Tok::RBrace | Tok::Eof)
            {
                items.push(self.proof_term()?);
            }
            using = Some(items);
        }
        let mut method = None;
        if self.at_kw("by") {
            self.bump();
            method = Some(self.method()?);
        }
        Ok((using, method))
    }

    fn method(&mut self) -> PResult<Method> {
        let name = match self.peek().clone() {
            Tok::Ident(s) if METHODS.contains(&s.as_str()) => s,
            _ => return Err(self.error_expected("proof method (auto, prop, rcf, solution, induction, guard)")),
        };
        self.bump();
        Ok(match name.as_str() {
            "auto" => Method::Auto,
            "prop" => Method::Prop,
            "rcf" => Method::Rcf,
            "solution" => Method::Solution,
            "induction" => Method::Induction,
            _ => {
                if self.eat(&Tok::LParen) {
                    let t = self.term()?;
                    self.expect(&Tok::RParen)?;
                    Method::Guard(Some(t))
                } else {
                    Method::Guard(None)
                }
            }
        })
    }

    pub(super) fn proof_term(&mut self) -> PResult<ProofTerm> {
        if self.eat(&Tok::Ellipsis) {
            return Ok(ProofTerm::Ellipsis);
        }
        let name = self.ident()?;
        if self.eat(&Tok::LParen) {
            let mut args = Vec::new();
            while !self.at(&Tok::RParen) {
                args.push(self.proof_term()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
            return Ok(ProofTerm::Rule(name, args));
        }
        Ok(ProofTerm::Fact(name))
    }

    fn let_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_kw("let")?;
        let name = self.ident()?;
        let mut params = Vec::new();
        let mut has_parens = false;
        if self.eat(&Tok::LParen) {
            has_parens = true;
            while !self.at(&Tok::RParen) {
                params.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
        }
        let def = match self.peek() {
            Tok::Eq if has_parens => {
                self.bump();
                Def::Term { name, params, body: self.term()? }
            }
            Tok::Equiv if has_parens => {
                self.bump();
                Def::Formula { name, params, body: self.formula()? }
            }
            Tok::GameDef if params.is_empty() => {
                self.bump();
                Def::Game { name, body: self.game()? }
            }
            _ => return Err(self.error_expected("`=`, `<->` or `::=` in definition")),
        };
        // a game ending in braces has already consumed its `;`
        if !matches!(def, Def::Game { .. }) || !self.eat(&Tok::Semi) && !self.prev_was(&Tok::Semi) {
            self.expect(&Tok::Semi)?;
        }
        Ok(StmtKind::Let(def))
    }

    fn brace_stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        self.expect(&Tok::LBrace)?;
        if self.at_ode_start() {
            let ode = self.ode_body()?;
            self.expect(&Tok::RBrace)?;
            self.eat(&Tok::Semi);
            return Ok(Stmt::new(StmtKind::Ode(ode), start.to(self.prev_span())));
        }
        let mut branches = vec![self.stmts_until(&[])?];
        while self.eat(&Tok::Choice) {
            branches.push(self.stmts_until(&[])?);
        }
        if self.at_kw("case") {
            return Err(self.error_expected("statement"));
        }
        if !self.eat(&Tok::RBrace) {
            return Err(self.error_expected("`}`"));
        }
        let inner = if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            let sp = start.to(self.prev_span());
            vec![Stmt::new(StmtKind::Choice(branches), sp)]
        };
        let kind = if self.eat(&Tok::Star) {
            StmtKind::Loop(inner)
        } else if inner.len() == 1 && matches!(inner[0].kind, StmtKind::Choice(_)) {
            inner.into_iter().next().unwrap().kind
        } else {
            StmtKind::Block(inner)
        };
        self.eat(&Tok::Semi);
        Ok(Stmt::new(kind, start.to(self.prev_span())))
    }

    fn ode_body(&mut self) -> PResult<OdeProof> {
        let mut eqs = Vec::new();
        loop {
            match self.peek() {
                Tok::GhostOpen | Tok::InvOpen => {
                    let open_span = self.span();
                    let inverse = self.bump() == Tok::InvOpen;
                    let (ghost, close) =
                        if inverse { (GhostKind::Inverse, Tok::InvClose) } else { (GhostKind::Forward, Tok::GhostClose) };
                    loop {
                        eqs.push(self.ode_eq(ghost)?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    if !self.eat(&close) {
                        return Err(Diagnostic::error(
                            open_span,
                            format!("unterminated ghost equations; expected `{}`", close.text()),
                        ));
                    }
                }
                _ => eqs.push(self.ode_eq(GhostKind::None)?),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let mut dom = Vec::new();
        while self.eat(&Tok::Amp) {
            self.in_domain = true;
            let clause = self.dom_clause();
            self.in_domain = false;
            dom.push(clause?);
        }
        Ok(OdeProof { eqs, dom })
    }

    fn dom_clause(&mut self) -> PResult<(DomClause, Span)> {
        {
            let sp = self.span();
            let clause = match self.peek() {
                Tok::Quest => match self.assume_like()? {
                    StmtKind::Assign { name, var, rhs, .. } => {
                        DomClause::Duration { name, var, rhs: rhs.expect("duration has a value") }
                    }
                    StmtKind::Assume { name, fml } => DomClause::Assume { name, fml },
                    _ => unreachable!(),
                },
                Tok::Bang => match self.assert_like()? {
                    StmtKind::Assert { name, fml, using, method } => DomClause::Assert { name, fml, using, method },
                    _ => unreachable!(),
                },
                _ => return Err(self.error_expected("`?` or `!` domain clause")),
            };
            Ok((clause, sp.to(self.prev_span())))
        }
    }

    fn ode_eq(&mut self, ghost: GhostKind) -> PResult<OdeEq> {
        let name = self.fact_name()?;
        let x = self.ident()?;
        self.expect(&Tok::Prime)?;
        self.expect(&Tok::Eq)?;
        let rhs = self.term()?;
        Ok(OdeEq { name, var: Var::new(x), rhs, ghost })
    }

    fn switch_stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        self.expect_kw("switch")?;
        let mut scrutinee = None;
        if self.eat(&Tok::LParen) {
            scrutinee = Some(self.proof_term()?);
            self.expect(&Tok::RParen)?;
        }
        self.expect(&Tok::LBrace)?;
        let mut cases = Vec::new();
        while self.at_kw("case") {
            let cs = self.span();
            self.bump();
            let name = self.fact_name()?;
            let guard = self.formula()?;
            self.expect(&Tok::FatArrow)?;
            let body = self.stmts_until(&[])?;
            if self.at(&Tok::Choice) {
                return Err(self.error_expected("`case` or `}`"));
            }
            cases.push(Case { name, guard, body, span: cs.to(self.prev_span()) });
        }
        if cases.is_empty() {
            return Err(self.error_expected("`case`"));
        }
        self.expect(&Tok::RBrace)?;
        self.eat(&Tok::Semi);
        Ok(Stmt::new(StmtKind::Switch { scrutinee, cases }, start.to(self.prev_span())))
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        self.expect_kw("for")?;
        self.expect(&Tok::LParen)?;
        let init = self.header_part(Parser::assignment)?;
        self.expect(&Tok::Semi)?;
        let inv = self.header_part(Parser::assert_like)?;
        self.expect(&Tok::Semi)?;
        let guard = self.header_part(Parser::assume_like)?;
        self.expect(&Tok::Semi)?;
        let update = self.header_part(Parser::assignment)?;
        self.eat(&Tok::Semi);
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::LBrace)?;
        let body = self.stmts_until(&[])?;
        self.expect(&Tok::RBrace)?;
        self.eat(&Tok::Semi);
        if !matches!(guard.kind, StmtKind::Assume { .. }) {
            return Err(Diagnostic::error(guard.span, "loop guard must be a test `?(...)`"));
        }
        let fl = ForLoop { init, inv, guard, update, body };
        Ok(Stmt::new(StmtKind::For(Box::new(fl)), start.to(self.prev_span())))
    }

    fn header_part(&mut self, f: fn(&mut Parser) -> PResult<StmtKind>) -> PResult<Stmt> {
        let sp: Span = self.span();
        let k = f(self)?;
        Ok(Stmt::new(k, sp.to(self.prev_span())))
    }
}

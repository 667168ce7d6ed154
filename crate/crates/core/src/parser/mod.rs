//! Recursive-descent parser for proof documents.

mod expr;
pub use expr::const_fold;
mod game;
mod stmt;

use crate::ast::*;
use crate::lexer::{lex, Tok, Token};
use crate::span::{Diagnostic, Span};

pub const KEYWORDS: &[&str] =
    &["for", "switch", "case", "note", "let", "using", "by", "print", "true", "false", "conclusion", "proves"];

pub const METHODS: &[&str] = &["auto", "prop", "rcf", "solution", "induction", "guard"];

pub type PResult<T> = Result<T, Diagnostic>;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Offset applied to spans of nested parsers (formula strings in `proves`).
    base: Option<Span>,
    /// Inside an ODE domain, a top-level `&` separates clauses.
    in_domain: bool,
}

impl Parser {
    pub fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0, base: None, in_domain: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.base.unwrap_or(self.toks[self.pos].span)
    }

    fn prev_span(&self) -> Span {
        self.base.unwrap_or(self.toks[self.pos.saturating_sub(1)].span)
    }

    fn prev_was(&self, t: &Tok) -> bool {
        self.pos > 0 && self.toks[self.pos - 1].tok == *t
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_expected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(self.span(), format!("expected {}, found {}", what, self.peek().describe()))
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error_expected(&format!("`{}`", t.text())))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.at_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_expected(&format!("`{}`", kw)))
        }
    }

    /// A user identifier: not reserved, not starting with `_`.
    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                Err(Diagnostic::error(self.span(), format!("`{}` is a reserved keyword", s)))
            }
            Tok::Ident(s) if s.starts_with('_') => {
                Err(Diagnostic::error(self.span(), format!("identifier `{}` may not start with `_`", s)))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error_expected("identifier")),
        }
    }

    fn is_ident(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
    }

    fn is_ident_at(&self, k: usize) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
    }

    fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }
}

pub fn parse_document(src: &str) -> PResult<Document> {
    let mut p = Parser::new(src)?;
    let mut doc = Document::default();
    while !p.at_eof() {
        if p.at_kw("conclusion") || p.at_kw("proves") {
            doc.commands.push(p.command()?);
            continue;
        }
        match p.peek() {
            Tok::RBrace | Tok::Choice | Tok::GhostClose | Tok::InvClose => {
                return Err(p.error_expected("statement"));
            }
            _ => {}
        }
        doc.stmts.push(p.stmt()?);
    }
    Ok(doc)
}

pub fn parse_formula(src: &str) -> PResult<Formula> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    if !p.at_eof() {
        return Err(p.error_expected("end of formula"));
    }
    Ok(f)
}

pub fn parse_term(src: &str) -> PResult<Term> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if !p.at_eof() {
        return Err(p.error_expected("end of term"));
    }
    Ok(t)
}

pub fn parse_game(src: &str) -> PResult<Game> {
    let mut p = Parser::new(src)?;
    let g = p.game()?;
    if !p.at_eof() {
        return Err(p.error_expected("end of game"));
    }
    Ok(g)
}

impl Parser {
    fn command(&mut self) -> PResult<Command> {
        let start = self.span();
        if self.at_kw("conclusion") {
            self.bump();
            let name = self.ident()?;
            let mut with = None;
            if self.at_kw("with") {
                self.bump();
                self.expect(&Tok::LParen)?;
                let mut names = Vec::new();
                while !self.at(&Tok::RParen) {
                    names.push(self.ident()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(&Tok::RParen)?;
                with = Some(names);
            }
            self.expect(&Tok::Semi)?;
            return Ok(Command::Conclusion { name, with, span: start.to(self.prev_span()) });
        }
        self.expect_kw("proves")?;
        let name = self.ident()?;
        let (text, sspan) = match self.peek().clone() {
            Tok::Str(s) => {
                let sp = self.span();
                self.bump();
                (s, sp)
            }
            _ => return Err(self.error_expected("quoted formula")),
        };
        let mut sub = Parser::new(&text).map_err(|d| relocate(d, sspan))?;
        sub.base = Some(sspan);
        let target = sub.formula()?;
        if !sub.at_eof() {
            return Err(sub.error_expected("end of formula"));
        }
        self.expect(&Tok::Semi)?;
        Ok(Command::Proves { name, target, span: start.to(self.prev_span()) })
    }
}

fn relocate(mut d: Diagnostic, to: Span) -> Diagnostic {
    d.span = to;
    d
}

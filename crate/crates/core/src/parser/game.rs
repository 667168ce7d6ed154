//! Hybrid-game syntax, used by `proves` targets and `let g ::= ...`.
//!
//! ```text
//! game  ::= seq ('++' seq)*
//! seq   ::= atom+
//! atom  ::= '{' ode '}' | '{' game '}' ('*' | '^@')*
//!         | x ':=' term ';' | x ':=' '*' ';' | '?' formula ';' | name ';'
//! ```

use super::{PResult, Parser};
use crate::ast::*;
use crate::lexer::Tok;

impl Parser {
    pub(super) fn game(&mut self) -> PResult<Game> {
        let mut g = self.game_seq()?;
        while self.eat(&Tok::Choice) {
            let r = self.game_seq()?;
            g = Game::Choice(Box::new(g), Box::new(r));
        }
        Ok(g)
    }

    fn game_seq(&mut self) -> PResult<Game> {
        let mut items = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::RBrack | Tok::Choice | Tok::Eof | Tok::Gt)
            && !matches!(self.peek(), Tok::Ident(k) if super::KEYWORDS.contains(&k.as_str()))
        {
            items.push(self.game_atom()?);
        }
        Ok(match items.len() {
            0 => return Err(self.error_expected("game")),
            1 => items.pop().unwrap(),
            _ => Game::Seq(items),
        })
    }

    fn game_atom(&mut self) -> PResult<Game> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let mut g = if self.at_ode_start() { self.game_ode()? } else { self.game()? };
                self.expect(&Tok::RBrace)?;
                loop {
                    if self.eat(&Tok::Star) {
                        g = Game::Repeat(Box::new(g));
                    } else if self.at(&Tok::Caret) && self.peek_at(1) == &Tok::At {
                        self.bump();
                        self.bump();
                        g = Game::Dual(Box::new(g));
                    } else {
                        break;
                    }
                }
                self.eat(&Tok::Semi);
                Ok(g)
            }
            Tok::Quest => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::Semi)?;
                Ok(Game::Test(f))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::Assign) {
                    let g = if self.eat(&Tok::Star) {
                        Game::Random(Var::new(name))
                    } else {
                        Game::Assign(Var::new(name), self.term()?)
                    };
                    self.expect(&Tok::Semi)?;
                    return Ok(g);
                }
                if self.eat(&Tok::LParen) {
                    self.expect(&Tok::RParen)?;
                }
                self.expect(&Tok::Semi)?;
                Ok(Game::Call(name))
            }
            _ => Err(self.error_expected("game")),
        }
    }

    /// `x' = f, ... & domain`, after the opening brace.
    fn game_ode(&mut self) -> PResult<Game> {
        let mut eqs = Vec::new();
        loop {
            let x = self.ident()?;
            self.expect(&Tok::Prime)?;
            self.expect(&Tok::Eq)?;
            let rhs = self.term()?;
            eqs.push((Var::new(x), rhs));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let dom = if self.eat(&Tok::Amp) { self.formula()? } else { Formula::True };
        Ok(Game::Ode(eqs, dom))
    }

    /// True if the tokens after an opening brace begin an ODE.
    pub(super) fn at_ode_start(&self) -> bool {
        let mut k = 0;
        if matches!(self.peek_at(k), Tok::GhostOpen | Tok::InvOpen) {
            k += 1;
        }
        if self.is_ident_at(k) && self.peek_at(k + 1) == &Tok::Colon {
            k += 2;
        }
        self.is_ident_at(k) && self.peek_at(k + 1) == &Tok::Prime
    }
}

//! Tokenizer for `.kaisar` documents.

use num_bigint::BigInt;

use crate::ast::Rat;
use crate::span::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(Rat),
    Str(String),
    Semi,
    Comma,
    Colon,
    Assign,
    GameDef,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    At,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Bang,
    Amp,
    Bar,
    Arrow,
    Equiv,
    Quest,
    Choice,
    FatArrow,
    Ellipsis,
    GhostOpen,
    GhostClose,
    InvOpen,
    InvClose,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Num(n) => format!("number `{}`", n),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of file".into(),
            t => format!("`{}`", t.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::GameDef => "::=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Prime => "'",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::At => "@",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::Equiv => "<->",
            Tok::Quest => "?",
            Tok::Choice => "++",
            Tok::FatArrow => "=>",
            Tok::Ellipsis => "...",
            Tok::GhostOpen => "/++",
            Tok::GhostClose => "++/",
            Tok::InvOpen => "/--",
            Tok::InvClose => "--/",
            Tok::Ident(_) | Tok::Num(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// longest symbols first
const SYMBOLS: &[(&str, Tok)] = &[
    ("::=", Tok::GameDef),
    ("<->", Tok::Equiv),
    ("...", Tok::Ellipsis),
    ("/++", Tok::GhostOpen),
    ("++/", Tok::GhostClose),
    ("/--", Tok::InvOpen),
    ("--/", Tok::InvClose),
    (":=", Tok::Assign),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("!=", Tok::Ne),
    ("->", Tok::Arrow),
    ("=>", Tok::FatArrow),
    ("++", Tok::Choice),
    (";", Tok::Semi),
    (",", Tok::Comma),
    (":", Tok::Colon),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("[", Tok::LBrack),
    ("]", Tok::RBrack),
    ("'", Tok::Prime),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    ("^", Tok::Caret),
    ("@", Tok::At),
    ("=", Tok::Eq),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("!", Tok::Bang),
    ("&", Tok::Amp),
    ("|", Tok::Bar),
    ("?", Tok::Quest),
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn here(&self) -> Span {
        Span { start: self.pos, end: self.pos, line: self.line, col: self.col }
    }

    fn bump(&mut self, n: usize) {
        for c in self.src[self.pos..self.pos + n].chars() {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.pos += n;
    }
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let start = cur.here();
        let rest = cur.rest();
        let Some(c) = rest.chars().next() else {
            out.push(Token { tok: Tok::Eof, span: start });
            return Ok(out);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let n = rest.find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(rest.len());
            let word = &rest[..n];
            cur.bump(n);
            Tok::Ident(word.to_string())
        } else if c.is_ascii_digit() {
            lex_number(&mut cur)
        } else if c == '"' {
            let Some(close) = rest[1..].find('"') else {
                return Err(Diagnostic::error(start, "unterminated string literal"));
            };
            let body = rest[1..1 + close].to_string();
            cur.bump(close + 2);
            Tok::Str(body)
        } else if let Some((sym, tok)) = SYMBOLS.iter().find(|(s, _)| rest.starts_with(s)) {
            cur.bump(sym.len());
            tok.clone()
        } else {
            return Err(Diagnostic::error(start, format!("unexpected character `{}`", c)));
        };
        let mut span = start;
        span.end = cur.pos;
        out.push(Token { tok, span });
    }
}

fn lex_number(cur: &mut Cursor) -> Tok {
    let rest = cur.rest();
    let int_len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let mut digits = rest[..int_len].to_string();
    let mut scale = 0usize;
    let after = &rest[int_len..];
    let mut len = int_len;
    if after.starts_with('.') && after[1..].starts_with(|c: char| c.is_ascii_digit()) {
        let frac = &after[1..];
        let flen = frac.find(|c: char| !c.is_ascii_digit()).unwrap_or(frac.len());
        digits.push_str(&frac[..flen]);
        scale = flen;
        len += 1 + flen;
    }
    cur.bump(len);
    let num: BigInt = digits.parse().expect("digits");
    let den = num_traits::pow(BigInt::from(10), scale);
    Tok::Num(Rat::new(num, den))
}

fn skip_trivia(cur: &mut Cursor) -> Result<(), Diagnostic> {
    loop {
        let rest = cur.rest();
        if let Some(c) = rest.chars().next() {
            if c.is_whitespace() {
                cur.bump(c.len_utf8());
                continue;
            }
        }
        if rest.starts_with("//") {
            let n = rest.find('\n').unwrap_or(rest.len());
            cur.bump(n);
            continue;
        }
        if rest.starts_with("/*") {
            let start = cur.here();
            match rest[2..].find("*/") {
                Some(n) => cur.bump(n + 4),
                None => return Err(Diagnostic::error(start, "unterminated block comment")),
            }
            continue;
        }
        return Ok(());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ghost_delimiters_and_primes() {
        assert_eq!(
            toks("/++ y' = y ++/"),
            vec![
                Tok::GhostOpen,
                Tok::Ident("y".into()),
                Tok::Prime,
                Tok::Eq,
                Tok::Ident("y".into()),
                Tok::GhostClose,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(toks("0.25")[0], Tok::Num(crate::ast::ratio(1, 4)));
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("x // hi\n /* there */ y").len(), 3);
    }

    #[test]
    fn spans_track_lines() {
        let t = lex("a\n  b").unwrap();
        assert_eq!((t[1].span.line, t[1].span.col), (2, 3));
    }
}

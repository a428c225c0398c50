//! Tokenizer shared by type specifications, terms and grammar files.
//!
//! Identifiers are runs of `[A-Za-z0-9_'-]`; `%` starts a comment that runs
//! to the end of the line.

use std::fmt;

use thiserror::Error;

/// A 1-based line/column location in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Tag(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Tag(s) => write!(f, "`#{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '-'
}

pub fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Pos { line: 1, col: 1 };

    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    };

    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut pos);
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut pos);
            }
            continue;
        }
        if is_ident_char(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut pos);
            }
            out.push((Tok::Ident(s), start));
            continue;
        }
        chars.next();
        advance(c, &mut pos);
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            '=' => {
                if chars.peek() == Some(&'>') {
                    chars.next();
                    advance('>', &mut pos);
                    Tok::Arrow
                } else {
                    return Err(SyntaxError::new(start, "expected `=>`"));
                }
            }
            '#' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    advance(c, &mut pos);
                }
                if s.is_empty() {
                    return Err(SyntaxError::new(start, "empty tag after `#`"));
                }
                Tok::Tag(s)
            }
            other => {
                return Err(SyntaxError::new(
                    start,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}

/// Cursor over a token vector.
pub(crate) struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(toks: Vec<(Tok, Pos)>) -> Self {
        Cursor { toks, at: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn expect(&mut self, want: &Tok) -> Result<Pos, SyntaxError> {
        let (tok, pos) = self.bump();
        if &tok == want {
            Ok(pos)
        } else {
            Err(SyntaxError::new(
                pos,
                format!("expected {want}, found {tok}"),
            ))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(String, Pos), SyntaxError> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(SyntaxError::new(
                pos,
                format!("expected identifier, found {tok}"),
            )),
        }
    }

    pub(crate) fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.bump();
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("g sub [a,b] % comment\n intro [f3:d].").unwrap();
        let kinds: Vec<_> = toks.iter().map(|(t, _)| t.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("g".into()));
        assert_eq!(kinds[2], Tok::LBracket);
        assert!(kinds.contains(&Tok::Colon));
        assert_eq!(*kinds.last().unwrap(), Tok::Eof);
        let intro = toks
            .iter()
            .find(|(t, _)| *t == Tok::Ident("intro".into()))
            .unwrap();
        assert_eq!(intro.1, Pos { line: 2, col: 2 });
    }

    #[test]
    fn tags_and_arrow() {
        let toks = tokenize("a(#3 d1, #3) => d").unwrap();
        assert!(toks.iter().any(|(t, _)| *t == Tok::Tag("3".into())));
        assert!(toks.iter().any(|(t, _)| *t == Tok::Arrow));
    }

    #[test]
    fn bad_characters() {
        let err = tokenize("a = b").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 3 });
        assert!(tokenize("a & b").is_err());
        assert!(tokenize("# x").is_err());
    }
}

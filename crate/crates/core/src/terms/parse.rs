use std::collections::HashMap;

use thiserror::Error;

use super::graph::FsGraph;
use super::term::{Mrs, Tag, Term};
use crate::lexer::{tokenize, Cursor, Pos, SyntaxError, Tok};
use crate::typesys::TypeHierarchy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: unknown type `{name}`")]
    UnknownType { name: String, pos: Pos },
    #[error("{pos}: `{name}` has arity {expected} but {found} arguments were given")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: Pos,
    },
    #[error("{pos}: tag `#{tag}` already has a contentful occurrence")]
    DuplicateTag { tag: String, pos: Pos },
    #[error("{pos}: tag `#{tag}` is never given a contentful occurrence")]
    UndefinedTag { tag: String, pos: Pos },
}

/// Parses one term and returns it in normal form.
///
/// A trailing `.` is accepted.
pub fn parse_term(text: &str, h: &TypeHierarchy) -> Result<Term, TermError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let mut p = TermParser::new(h);
    let t = p.term(&mut cur)?;
    finish(&mut cur)?;
    p.check_defined()?;
    Ok(normalize(&[t]).remove(0))
}

/// Parses a multi-rooted structure `t1, t2, ... [=> head]` in normal form.
pub fn parse_mrs(text: &str, h: &TypeHierarchy) -> Result<Mrs, TermError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let m = parse_mrs_at(&mut cur, h)?;
    finish(&mut cur)?;
    Ok(m)
}

fn finish(cur: &mut Cursor) -> Result<(), TermError> {
    cur.eat(&Tok::Dot);
    if !cur.at_eof() {
        let (tok, pos) = cur.bump();
        return Err(SyntaxError::new(pos, format!("unexpected {tok} after term")).into());
    }
    Ok(())
}

/// Parses a term at the cursor, leaving the following token unconsumed.
pub(crate) fn parse_term_at(cur: &mut Cursor, h: &TypeHierarchy) -> Result<Term, TermError> {
    let mut p = TermParser::new(h);
    let t = p.term(cur)?;
    p.check_defined()?;
    Ok(normalize(&[t]).remove(0))
}

pub(crate) fn parse_mrs_at(cur: &mut Cursor, h: &TypeHierarchy) -> Result<Mrs, TermError> {
    let mut p = TermParser::new(h);
    let mut roots = vec![p.term(cur)?];
    let mut headed = false;
    loop {
        if cur.eat(&Tok::Comma) {
            roots.push(p.term(cur)?);
        } else if cur.eat(&Tok::Arrow) {
            roots.push(p.term(cur)?);
            headed = true;
            break;
        } else {
            break;
        }
    }
    p.check_defined()?;
    Ok(Mrs {
        roots: normalize(&roots),
        headed,
    })
}

fn normalize(terms: &[Term]) -> Vec<Term> {
    // tag errors were already reported with positions by the parser
    FsGraph::from_terms(terms)
        .ok()
        .and_then(|g| g.to_terms())
        .expect("parsed terms have consistent tags")
}

struct TermParser<'h> {
    h: &'h TypeHierarchy,
    // tag name -> (tag, first position, has contentful occurrence)
    tags: HashMap<String, (Tag, Pos, bool)>,
    order: Vec<String>,
}

impl<'h> TermParser<'h> {
    fn new(h: &'h TypeHierarchy) -> Self {
        TermParser {
            h,
            tags: HashMap::new(),
            order: Vec::new(),
        }
    }

    fn tag(&mut self, name: &str, pos: Pos, defining: bool) -> Result<Tag, TermError> {
        let next = Tag(self.order.len() as u32 + 1);
        let entry = self.tags.entry(name.to_string()).or_insert_with(|| {
            self.order.push(name.to_string());
            (next, pos, false)
        });
        if defining {
            if entry.2 {
                return Err(TermError::DuplicateTag {
                    tag: name.to_string(),
                    pos,
                });
            }
            entry.2 = true;
        }
        Ok(entry.0)
    }

    fn check_defined(&self) -> Result<(), TermError> {
        for name in &self.order {
            let (_, pos, defined) = self.tags[name];
            if !defined {
                return Err(TermError::UndefinedTag {
                    tag: name.clone(),
                    pos,
                });
            }
        }
        Ok(())
    }

    fn term(&mut self, cur: &mut Cursor) -> Result<Term, TermError> {
        let mut tag = None;
        if let Tok::Tag(name) = cur.peek().clone() {
            let pos = cur.pos();
            cur.bump();
            if !matches!(cur.peek(), Tok::Ident(_)) {
                return Ok(Term::Back(self.tag(&name, pos, false)?));
            }
            tag = Some(self.tag(&name, pos, true)?);
        }
        let (name, pos) = cur.ident()?;
        let ty = self
            .h
            .type_id(&name)
            .ok_or_else(|| TermError::UnknownType {
                name: name.clone(),
                pos,
            })?;
        let arity = self.h.arity(ty);
        if !cur.eat(&Tok::LParen) {
            return Ok(if arity == 0 {
                Term::Full {
                    tag,
                    ty,
                    args: Vec::new(),
                }
            } else {
                Term::General { tag, ty }
            });
        }
        let mut args = vec![self.term(cur)?];
        while cur.eat(&Tok::Comma) {
            args.push(self.term(cur)?);
        }
        cur.expect(&Tok::RParen)?;
        if args.len() != arity {
            return Err(TermError::Arity {
                name,
                expected: arity,
                found: args.len(),
                pos,
            });
        }
        Ok(Term::Full { tag, ty, args })
    }
}

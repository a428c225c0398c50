use std::collections::HashMap;

use thiserror::Error;

use crate::lexer::{tokenize, Cursor, Pos, SyntaxError, Tok};
use crate::terms::{check_graph, parse_mrs_at, parse_term_at, FsGraph, Mrs, Term, TermError};
use crate::typesys::spec::parse_statement;
use crate::typesys::{validate, TypeError, TypeHierarchy, TypeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("{pos}: {message}")]
    Clause { pos: Pos, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub mrs: Mrs,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub word: String,
    pub term: Term,
    pub pos: Pos,
}

/// A type hierarchy together with rules, lexical entries and an optional
/// start structure, read from one file whose clauses may come in any order.
///
/// ```text
/// bot sub [...].            % type statements
/// rule name: t1, t2 => h.   % the name is optional
/// lex word => t.            % a word may have several entries
/// start => t.
/// ```
#[derive(Debug, Clone)]
pub struct Grammar {
    pub hierarchy: TypeHierarchy,
    pub rules: Vec<Rule>,
    pub lexicon: Vec<LexEntry>,
    pub start: Option<Term>,
}

fn is_clause(cur: &Cursor) -> bool {
    matches!(cur.peek(), Tok::Ident(k) if k == "rule" || k == "lex" || k == "start")
        && !matches!(cur.peek_at(1), Tok::Ident(k) if k == "sub")
}

fn skip_clause(cur: &mut Cursor) -> Result<(), SyntaxError> {
    loop {
        match cur.bump() {
            (Tok::Dot, _) => return Ok(()),
            (Tok::Eof, pos) => return Err(SyntaxError::new(pos, "expected `.`")),
            _ => {}
        }
    }
}

impl Grammar {
    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        let toks = tokenize(text)?;

        // types first: terms can only be read against a hierarchy
        let mut cur = Cursor::new(toks.clone());
        let mut spec = TypeSpec::default();
        let mut seen: HashMap<String, Pos> = HashMap::new();
        while !cur.at_eof() {
            if is_clause(&cur) {
                skip_clause(&mut cur)?;
                continue;
            }
            let st = parse_statement(&mut cur)?;
            if let Some(first) = seen.insert(st.name.clone(), st.pos) {
                return Err(SyntaxError::new(
                    st.pos,
                    format!(
                        "type `{}` is characterized twice (first at {first})",
                        st.name
                    ),
                )
                .into());
            }
            spec.statements.push(st);
        }
        let hierarchy = validate(&spec)?;

        let mut g = Grammar {
            hierarchy,
            rules: Vec::new(),
            lexicon: Vec::new(),
            start: None,
        };
        let mut cur = Cursor::new(toks);
        while !cur.at_eof() {
            if !is_clause(&cur) {
                skip_clause(&mut cur)?;
                continue;
            }
            let (kw, pos) = cur.ident()?;
            match kw.as_str() {
                "rule" => {
                    let name = if matches!(cur.peek(), Tok::Ident(_))
                        && matches!(cur.peek_at(1), Tok::Colon)
                    {
                        let (name, npos) = cur.ident()?;
                        cur.bump();
                        if g.rules.iter().any(|r| r.name == name) {
                            return Err(GrammarError::Clause {
                                pos: npos,
                                message: format!("rule `{name}` is defined twice"),
                            });
                        }
                        name
                    } else {
                        format!("rule{}", g.rules.len() + 1)
                    };
                    let mrs = parse_mrs_at(&mut cur, &g.hierarchy)?;
                    if !mrs.headed || mrs.roots.len() < 2 {
                        return Err(GrammarError::Clause {
                            pos,
                            message: format!(
                                "rule `{name}` needs at least one body element and a `=>` head"
                            ),
                        });
                    }
                    g.rules.push(Rule { name, mrs, pos });
                }
                "lex" => {
                    let (word, _) = cur.ident()?;
                    cur.expect(&Tok::Arrow)?;
                    let term = parse_term_at(&mut cur, &g.hierarchy)?;
                    g.lexicon.push(LexEntry { word, term, pos });
                }
                _ => {
                    cur.expect(&Tok::Arrow)?;
                    let term = parse_term_at(&mut cur, &g.hierarchy)?;
                    if g.start.is_some() {
                        return Err(GrammarError::Clause {
                            pos,
                            message: "more than one start clause".into(),
                        });
                    }
                    g.start = Some(term);
                }
            }
            cur.expect(&Tok::Dot)?;
        }
        Ok(g)
    }

    /// Lexical entries of `word`, in file order.
    pub fn entries<'a>(&'a self, word: &'a str) -> impl Iterator<Item = &'a LexEntry> + 'a {
        self.lexicon.iter().filter(move |e| e.word == word)
    }

    /// Well-typedness problems in rules, entries and the start structure.
    /// They do not stop compilation.
    pub fn warnings(&self) -> Vec<String> {
        let h = &self.hierarchy;
        let mut out = Vec::new();
        let mut report = |what: String, g: FsGraph| {
            for v in check_graph(&g, h) {
                out.push(format!("{what}: {}", v.display(h)));
            }
        };
        for r in &self.rules {
            if let Ok(g) = FsGraph::from_mrs(&r.mrs) {
                report(format!("{}: rule `{}`", r.pos, r.name), g);
            }
        }
        for e in &self.lexicon {
            if let Ok(g) = FsGraph::from_term(&e.term) {
                report(format!("{}: entry `{}`", e.pos, e.word), g);
            }
        }
        if let Some(s) = &self.start {
            if let Ok(g) = FsGraph::from_term(s) {
                report("start".into(), g);
            }
        }
        out
    }
}

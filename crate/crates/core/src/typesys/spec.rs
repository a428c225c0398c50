use std::collections::HashMap;

use crate::lexer::{tokenize, Cursor, Pos, SyntaxError, Tok};

/// One `t sub [...] intro [...].` statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub name: String,
    pub subtypes: Vec<String>,
    pub intro: Vec<(String, String)>,
    pub pos: Pos,
}

/// An unvalidated type specification, one statement per characterized type.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeSpec {
    pub statements: Vec<Statement>,
}

impl TypeSpec {
    pub fn statement(&self, name: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.name == name)
    }
}

/// Parses a whole type specification.
pub fn parse_type_spec(text: &str) -> Result<TypeSpec, SyntaxError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let mut statements: Vec<Statement> = Vec::new();
    let mut seen: HashMap<String, Pos> = HashMap::new();
    while !cur.at_eof() {
        let st = parse_statement(&mut cur)?;
        if let Some(first) = seen.get(&st.name) {
            return Err(SyntaxError::new(
                st.pos,
                format!(
                    "type `{}` is characterized twice (first at {first})",
                    st.name
                ),
            ));
        }
        seen.insert(st.name.clone(), st.pos);
        statements.push(st);
    }
    Ok(TypeSpec { statements })
}

pub(crate) fn parse_statement(cur: &mut Cursor) -> Result<Statement, SyntaxError> {
    let (name, pos) = cur.ident()?;
    match cur.ident()? {
        (kw, _) if kw == "sub" => {}
        (kw, p) => return Err(SyntaxError::new(p, format!("expected `sub`, found `{kw}`"))),
    }
    cur.expect(&Tok::LBracket)?;
    let mut subtypes = Vec::new();
    if !cur.eat(&Tok::RBracket) {
        loop {
            subtypes.push(cur.ident()?.0);
            if cur.eat(&Tok::RBracket) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    let mut intro = Vec::new();
    if matches!(cur.peek(), Tok::Ident(kw) if kw == "intro") {
        cur.bump();
        cur.expect(&Tok::LBracket)?;
        if !cur.eat(&Tok::RBracket) {
            loop {
                let (feat, _) = cur.ident()?;
                cur.expect(&Tok::Colon)?;
                let (value, _) = cur.ident()?;
                intro.push((feat, value));
                if cur.eat(&Tok::RBracket) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
    }
    cur.expect(&Tok::Dot)?;
    Ok(Statement {
        name,
        subtypes,
        intro,
        pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_statement() {
        let spec = parse_type_spec("bot sub [g,d].").unwrap();
        let st = &spec.statements[0];
        assert_eq!(st.name, "bot");
        assert_eq!(st.subtypes, vec!["g", "d"]);
        assert!(st.intro.is_empty());
    }

    #[test]
    fn intro_clause() {
        let spec = parse_type_spec("g sub [a,b] intro [f3:d].").unwrap();
        let st = &spec.statements[0];
        assert_eq!(st.subtypes, vec!["a", "b"]);
        assert_eq!(st.intro, vec![("f3".to_string(), "d".to_string())]);
    }

    #[test]
    fn empty_and_missing_intro_agree() {
        let a = parse_type_spec("x sub [] intro [].").unwrap();
        let b = parse_type_spec("x sub [].").unwrap();
        assert_eq!(a.statements[0].intro, b.statements[0].intro);
    }

    #[test]
    fn duplicate_characterization() {
        let err = parse_type_spec("x sub [].\nx sub [].").unwrap_err();
        assert_eq!(err.pos.line, 2);
        assert!(err.message.contains("characterized twice"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_type_spec("bot sub [g,d]\ng sub [].").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 1 });
        let err = parse_type_spec("bot subs [g].").unwrap_err();
        assert!(err.message.contains("`sub`"));
    }
}

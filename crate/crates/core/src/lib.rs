//! Typed feature structures compiled to an abstract machine.
//!
//! A validated [`TypeHierarchy`] fixes the types, their features and a
//! unification plan for every pair of types. Terms written in linear
//! notation are flattened to register equations and compiled to query code
//! (which builds a structure on the heap) or program code (which unifies
//! with one). Grammar rules compile to program code for their bodies and
//! query code for their heads, and a chart [`Parser`] drives them.
//!
//! ```
//! use tfsam::{machine::unify_terms, parse_term, Machine, TypeHierarchy};
//!
//! let h = TypeHierarchy::from_source(
//!     "bot sub [g,d]. g sub [a,b] intro [f3:d]. a sub [c] intro [f1:bot].
//!      c sub [] intro [f4:bot]. b sub [c,e] intro [f2:bot]. d sub [d1,d2].
//!      d1 sub []. d2 sub [].",
//! )
//! .unwrap();
//! let query = parse_term("b(b(#1 d,#1),d)", &h).unwrap();
//! let program = parse_term("a(#3 d1,#3)", &h).unwrap();
//! let mut m = Machine::new(&h);
//! let result = unify_terms(&mut m, &query, &program).unwrap().unwrap();
//! let t = result.to_term().unwrap();
//! assert_eq!(t.display(&h).to_string(), "c(#1 d1,b(#2 d,#2),#1,bot)");
//! ```

pub mod compiler;
pub mod lexer;
pub mod machine;
pub mod parser;
pub mod terms;
pub mod typesys;

pub use compiler::{CodeArea, Instr};
pub use lexer::{Pos, SyntaxError};
pub use machine::{Cell, Machine, MachineConfig, MachineError};
pub use parser::{Grammar, GrammarError, ParseError, ParseResult, Parser, ParserConfig};
pub use terms::{iso, parse_mrs, parse_term, FsGraph, Mrs, Term, TermError};
pub use typesys::{TypeError, TypeHierarchy, TypeId};

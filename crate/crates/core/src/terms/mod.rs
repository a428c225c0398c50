//! Linear term notation for typed feature structures, its graph form, and
//! flattening into register equations.
//!
//! Syntax: `type(arg,...)` with positional arguments in alphabetical feature
//! order, `#n` tags for reentrancy, `,` between the roots of a multi-rooted
//! structure and `=>` before a rule head. A bare type name with features
//! stands for the most general structure of that type.

mod check;
mod flatten;
mod graph;
mod parse;
mod term;

pub use check::{check_graph, well_typed_check, Violation};
pub use flatten::{flatten, flatten_graph, flatten_mrs, Equation, EquationSet, Reg, Rhs};
pub use graph::{FsGraph, GraphError, Node, NodeId};
pub use parse::{parse_mrs, parse_term, TermError};
pub(crate) use parse::{parse_mrs_at, parse_term_at};
pub use term::{Mrs, Tag, Term};

use crate::typesys::TypeHierarchy;

/// Structural identity of two terms: same types, positions and reentrancies.
pub fn iso(a: &Term, b: &Term, h: &TypeHierarchy) -> bool {
    match (FsGraph::from_term(a), FsGraph::from_term(b)) {
        (Ok(ga), Ok(gb)) => ga.iso(&gb, h),
        _ => false,
    }
}

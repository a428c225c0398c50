use std::fmt;

use super::graph::{FsGraph, Node};
use super::term::Term;
use crate::typesys::{FeatureId, TypeHierarchy, TypeId};

/// A feature value that is not subsumed by its appropriate type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Features from the root to the offending value.
    pub path: Vec<FeatureId>,
    pub expected: TypeId,
    pub found: TypeId,
}

impl Violation {
    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> impl fmt::Display + 'a {
        ViolationDisplay { v: self, h }
    }
}

struct ViolationDisplay<'a> {
    v: &'a Violation,
    h: &'a TypeHierarchy,
}

impl fmt::Display for ViolationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<&str> = self
            .v
            .path
            .iter()
            .map(|&p| self.h.feature_name(p))
            .collect();
        write!(
            f,
            "at {}: expected a subtype of `{}`, found `{}`",
            if path.is_empty() {
                "<root>".to_string()
            } else {
                path.join(".")
            },
            self.h.type_name(self.v.expected),
            self.h.type_name(self.v.found)
        )
    }
}

pub fn well_typed_check(t: &Term, h: &TypeHierarchy) -> Vec<Violation> {
    match FsGraph::from_term(t) {
        Ok(g) => check_graph(&g, h),
        Err(_) => Vec::new(),
    }
}

/// Checks every arc of every reachable node once, reporting each violation
/// with the first path that reaches it.
pub fn check_graph(g: &FsGraph, h: &TypeHierarchy) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = vec![false; g.nodes.len()];
    let mut stack: Vec<(usize, Vec<FeatureId>)> =
        g.roots.iter().rev().map(|&r| (r, Vec::new())).collect();
    while let Some((v, path)) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        let Node::Full { ty, args } = &g.nodes[v] else {
            continue;
        };
        let feats = h.features(*ty);
        for (i, &a) in args.iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(feats[i]);
            if let Some(found) = g.nodes[a].ty() {
                let expected = h.approp_at(*ty, i);
                if !h.subsumes(expected, found) {
                    out.push(Violation {
                        path: p.clone(),
                        expected,
                        found,
                    });
                }
            }
            stack.push((a, p));
        }
    }
    out.sort_by(|x, y| x.path.cmp(&y.path));
    out
}

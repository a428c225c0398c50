use std::collections::HashMap;

use thiserror::Error;

use super::term::{Mrs, Tag, Term};
use crate::typesys::{TypeHierarchy, TypeId};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Full {
        ty: TypeId,
        args: Vec<NodeId>,
    },
    /// Most general structure of `ty`, not expanded.
    General {
        ty: TypeId,
    },
    /// A value not yet known (a self-referential cell on the heap).
    Unknown,
}

impl Node {
    pub fn ty(&self) -> Option<TypeId> {
        match self {
            Node::Full { ty, .. } | Node::General { ty } => Some(*ty),
            Node::Unknown => None,
        }
    }
}

/// Explicit multi-rooted graph form of a feature structure.
///
/// This is the exchange format between terms and the heap: terms convert to
/// and from it, the machine extracts it and loads it back.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FsGraph {
    pub nodes: Vec<Node>,
    pub roots: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("tag {0} has more than one contentful occurrence")]
    DuplicateTag(Tag),
    #[error("tag {0} never has a contentful occurrence")]
    UndefinedTag(Tag),
}

impl FsGraph {
    pub fn from_term(t: &Term) -> Result<FsGraph, GraphError> {
        Self::from_terms(std::slice::from_ref(t))
    }

    pub fn from_mrs(m: &Mrs) -> Result<FsGraph, GraphError> {
        Self::from_terms(&m.roots)
    }

    /// Builds a graph from terms sharing one tag scope.
    pub fn from_terms(terms: &[Term]) -> Result<FsGraph, GraphError> {
        let mut b = Builder::default();
        let roots = terms
            .iter()
            .map(|t| b.add(t))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some((&tag, _)) = b
            .tags
            .iter()
            .filter(|(_, (_, defined))| !defined)
            .min_by_key(|(t, _)| **t)
        {
            return Err(GraphError::UndefinedTag(tag));
        }
        Ok(FsGraph {
            nodes: b.nodes,
            roots,
        })
    }

    /// Incoming references per node: arcs from reachable nodes plus root
    /// occurrences.
    pub fn ref_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = Vec::new();
        for &r in &self.roots {
            counts[r] += 1;
            stack.push(r);
        }
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if let Node::Full { args, .. } = &self.nodes[v] {
                for &a in args {
                    counts[a] += 1;
                    stack.push(a);
                }
            }
        }
        counts
    }

    pub fn contains_unknown(&self) -> bool {
        self.reachable()
            .iter()
            .any(|&v| self.nodes[v] == Node::Unknown)
    }

    /// Nodes reachable from the roots, in depth-first preorder.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut order = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        for &r in &self.roots {
            self.preorder(r, &mut seen, &mut |v| order.push(v));
        }
        order
    }

    fn preorder(&self, root: NodeId, seen: &mut [bool], visit: &mut impl FnMut(NodeId)) {
        if seen[root] {
            return;
        }
        // (node, next arg index)
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        seen[root] = true;
        visit(root);
        while let Some((v, i)) = stack.last_mut() {
            let args: &[NodeId] = match &self.nodes[*v] {
                Node::Full { args, .. } => args,
                _ => &[],
            };
            if *i >= args.len() {
                stack.pop();
                continue;
            }
            let next = args[*i];
            *i += 1;
            if !seen[next] {
                seen[next] = true;
                visit(next);
                stack.push((next, 0));
            }
        }
    }

    /// Canonical form: unshared most-general substructures are folded into
    /// `General` nodes and nodes are renumbered in depth-first preorder.
    /// Two graphs denote the same structure exactly when their canonical
    /// forms are equal.
    pub fn canonical(&self, h: &TypeHierarchy) -> FsGraph {
        let counts = self.ref_counts();
        let general = self.most_general_nodes(h, &counts);

        let mut order = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        // folded nodes hide their arcs from the traversal
        let view = FsGraph {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(v, n)| match n {
                    Node::Full { ty, .. } if general[v] => Node::General { ty: *ty },
                    Node::Full { ty, args } if h.arity(*ty) == 0 && args.is_empty() => {
                        Node::General { ty: *ty }
                    }
                    other => other.clone(),
                })
                .collect(),
            roots: self.roots.clone(),
        };
        for &r in &view.roots {
            view.preorder(r, &mut seen, &mut |v| order.push(v));
        }
        let mut renumber = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        let nodes = order
            .iter()
            .map(|&old| match &view.nodes[old] {
                Node::Full { ty, args } => Node::Full {
                    ty: *ty,
                    args: args.iter().map(|&a| renumber[a]).collect(),
                },
                other => other.clone(),
            })
            .collect();
        FsGraph {
            nodes,
            roots: view.roots.iter().map(|&r| renumber[r]).collect(),
        }
    }

    /// Least fixpoint: a node is most general if it is `General`, or a `Full`
    /// node whose every arc leads to an unshared most-general node of exactly
    /// the appropriate type.
    fn most_general_nodes(&self, h: &TypeHierarchy, counts: &[usize]) -> Vec<bool> {
        let mut general: Vec<bool> = self
            .nodes
            .iter()
            .map(|n| matches!(n, Node::General { .. }))
            .collect();
        loop {
            let mut changed = false;
            for (v, n) in self.nodes.iter().enumerate() {
                if general[v] {
                    continue;
                }
                if let Node::Full { ty, args } = n {
                    let ok = args.iter().enumerate().all(|(i, &a)| {
                        general[a]
                            && counts[a] == 1
                            && self.nodes[a].ty() == Some(h.approp_at(*ty, i))
                    });
                    if ok {
                        general[v] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                return general;
            }
        }
    }

    pub fn iso(&self, other: &FsGraph, h: &TypeHierarchy) -> bool {
        self.canonical(h) == other.canonical(h)
    }

    /// Normal-form terms, one per root. Tags are assigned only to shared
    /// nodes, numbered from 1 in order of first occurrence. Returns `None` if
    /// a reachable node is `Unknown`.
    pub fn to_terms(&self) -> Option<Vec<Term>> {
        if self.contains_unknown() {
            return None;
        }
        let counts = self.ref_counts();
        let mut tags: HashMap<NodeId, Tag> = HashMap::new();
        let mut emitted = vec![false; self.nodes.len()];
        let mut next_tag = 1;
        Some(
            self.roots
                .iter()
                .map(|&r| self.term_at(r, &counts, &mut tags, &mut emitted, &mut next_tag))
                .collect(),
        )
    }

    pub fn to_term(&self) -> Option<Term> {
        self.to_terms()?.into_iter().next()
    }

    fn term_at(
        &self,
        v: NodeId,
        counts: &[usize],
        tags: &mut HashMap<NodeId, Tag>,
        emitted: &mut [bool],
        next_tag: &mut u32,
    ) -> Term {
        if emitted[v] {
            return Term::Back(tags[&v]);
        }
        emitted[v] = true;
        let tag = if counts[v] > 1 {
            let t = Tag(*next_tag);
            *next_tag += 1;
            tags.insert(v, t);
            Some(t)
        } else {
            None
        };
        match &self.nodes[v] {
            Node::Full { ty, args } => Term::Full {
                tag,
                ty: *ty,
                args: args
                    .iter()
                    .map(|&a| self.term_at(a, counts, tags, emitted, next_tag))
                    .collect(),
            },
            Node::General { ty } => Term::General { tag, ty: *ty },
            Node::Unknown => unreachable!("checked by contains_unknown"),
        }
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    // tag -> (node, has contentful occurrence)
    tags: HashMap<Tag, (NodeId, bool)>,
}

impl Builder {
    fn slot_for(&mut self, tag: Option<Tag>, defining: bool) -> Result<NodeId, GraphError> {
        let Some(tag) = tag else {
            self.nodes.push(Node::Unknown);
            return Ok(self.nodes.len() - 1);
        };
        let next = self.nodes.len();
        let entry = self.tags.entry(tag).or_insert((next, false));
        if entry.0 == next {
            self.nodes.push(Node::Unknown);
        }
        if defining {
            if entry.1 {
                return Err(GraphError::DuplicateTag(tag));
            }
            entry.1 = true;
        }
        Ok(entry.0)
    }

    fn add(&mut self, t: &Term) -> Result<NodeId, GraphError> {
        match t {
            Term::Back(tag) => self.slot_for(Some(*tag), false),
            Term::General { tag, ty } => {
                let v = self.slot_for(*tag, true)?;
                self.nodes[v] = Node::General { ty: *ty };
                Ok(v)
            }
            Term::Full { tag, ty, args } => {
                let v = self.slot_for(*tag, true)?;
                let args = args
                    .iter()
                    .map(|a| self.add(a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.nodes[v] = Node::Full { ty: *ty, args };
                Ok(v)
            }
        }
    }
}

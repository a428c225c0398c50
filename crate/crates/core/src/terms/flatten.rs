use std::fmt;
use std::ops::Range;

use super::graph::{FsGraph, Node, NodeId};
use super::term::{Mrs, Term};
use crate::typesys::{TypeHierarchy, TypeId};

/// A virtual machine register, printed `X1`, `X2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg(pub u32);

impl Reg {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    Node(Vec<Reg>),
    /// Most general structure of the type; arguments left implicit.
    General,
}

/// `reg = ty(args...)`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub reg: Reg,
    pub ty: TypeId,
    pub rhs: Rhs,
}

impl Equation {
    pub fn args(&self) -> &[Reg] {
        match &self.rhs {
            Rhs::Node(args) => args,
            Rhs::General => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquationSet {
    pub equations: Vec<Equation>,
    /// Register of each root, in root order.
    pub roots: Vec<Reg>,
    /// Equations first emitted while visiting each root. Empty for a root
    /// that only refers back to an earlier one.
    pub spans: Vec<Range<usize>>,
}

impl EquationSet {
    pub fn max_reg(&self) -> u32 {
        self.equations.iter().map(|e| e.reg.0).max().unwrap_or(0)
    }

    pub fn root_equations(&self, root: usize) -> &[Equation] {
        &self.equations[self.spans[root].clone()]
    }

    /// Renumbers every register by adding `offset`.
    pub fn shift(&self, offset: u32) -> EquationSet {
        let sh = |r: &Reg| Reg(r.0 + offset);
        EquationSet {
            equations: self
                .equations
                .iter()
                .map(|e| Equation {
                    reg: sh(&e.reg),
                    ty: e.ty,
                    rhs: match &e.rhs {
                        Rhs::Node(args) => Rhs::Node(args.iter().map(sh).collect()),
                        Rhs::General => Rhs::General,
                    },
                })
                .collect(),
            roots: self.roots.iter().map(sh).collect(),
            spans: self.spans.clone(),
        }
    }

    /// Rebuilds the graph the equations describe.
    pub fn to_graph(&self) -> FsGraph {
        let n = self.max_reg() as usize + 1;
        let mut nodes = vec![Node::Unknown; n];
        for e in &self.equations {
            nodes[e.reg.index()] = match &e.rhs {
                Rhs::Node(args) => Node::Full {
                    ty: e.ty,
                    args: args.iter().map(|r| r.index()).collect(),
                },
                Rhs::General => Node::General { ty: e.ty },
            };
        }
        FsGraph {
            nodes,
            roots: self.roots.iter().map(|r| r.index()).collect(),
        }
    }

    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> EquationsDisplay<'a> {
        EquationsDisplay { set: self, h }
    }
}

pub struct EquationsDisplay<'a> {
    set: &'a EquationSet,
    h: &'a TypeHierarchy,
}

impl fmt::Display for EquationsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.set.equations {
            write!(f, "{} = {}", e.reg, self.h.type_name(e.ty))?;
            if let Rhs::Node(args) = &e.rhs {
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Flattens a term into equations, registers numbered from `X1`.
pub fn flatten(t: &Term) -> EquationSet {
    flatten_graph(&FsGraph::from_term(t).expect("term is in normal form"))
}

pub fn flatten_mrs(m: &Mrs) -> EquationSet {
    flatten_graph(&FsGraph::from_mrs(m).expect("MRS is in normal form"))
}

/// Registers follow first visit: a node's argument registers are allocated
/// when the node itself is visited, and equations are emitted depth-first.
pub fn flatten_graph(g: &FsGraph) -> EquationSet {
    let mut regs: Vec<Option<Reg>> = vec![None; g.nodes.len()];
    let mut next = 1u32;
    let mut alloc = |v: NodeId, regs: &mut Vec<Option<Reg>>| -> bool {
        if regs[v].is_some() {
            return false;
        }
        regs[v] = Some(Reg(next));
        next += 1;
        true
    };
    let mut out = EquationSet::default();
    for &root in &g.roots {
        let start = out.equations.len();
        if alloc(root, &mut regs) {
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                let reg = regs[v].unwrap();
                let eq = match &g.nodes[v] {
                    Node::Full { ty, args } => {
                        let mut fresh = Vec::new();
                        for &a in args {
                            if alloc(a, &mut regs) {
                                fresh.push(a);
                            }
                        }
                        stack.extend(fresh.into_iter().rev());
                        Equation {
                            reg,
                            ty: *ty,
                            rhs: Rhs::Node(args.iter().map(|&a| regs[a].unwrap()).collect()),
                        }
                    }
                    Node::General { ty } => Equation {
                        reg,
                        ty: *ty,
                        rhs: Rhs::General,
                    },
                    Node::Unknown => panic!("cannot flatten an unknown node"),
                };
                out.equations.push(eq);
            }
        }
        out.roots.push(regs[root].unwrap());
        out.spans.push(start..out.equations.len());
    }
    out
}

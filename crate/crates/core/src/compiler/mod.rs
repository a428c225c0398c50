//! Compilation of equation sets, rules and input strings into abstract
//! machine code.
//!
//! Query code builds a structure on the heap: every `put_node` comes before
//! every `put_arc`, so arcs may point at any node of the structure, cycles
//! included. Program code matches a structure already on the heap with
//! `get_structure` / `unify_*` instructions. Rules interleave program code
//! for each body element with control instructions and end with query code
//! for the head.

mod asm;

use std::collections::HashSet;

use crate::terms::{flatten_mrs, EquationSet, Mrs, Reg, Rhs};
use crate::typesys::TypeId;

pub use asm::{assemble, disassemble, AsmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    PutNode {
        ty: TypeId,
        arity: usize,
        reg: Reg,
    },
    /// Query side of an unexpanded most general structure.
    PutVar {
        ty: TypeId,
        reg: Reg,
    },
    PutArc {
        reg: Reg,
        offset: usize,
        value: Reg,
    },
    GetStructure {
        ty: TypeId,
        arity: usize,
        reg: Reg,
    },
    /// Program side of an unexpanded most general structure.
    GetVar {
        ty: TypeId,
        reg: Reg,
    },
    UnifyVariable(Reg),
    UnifyValue(Reg),
    Advance,
    StartRule(usize),
    MoveDot,
    NextItem,
    EndRule,
}

impl Instr {
    /// Registers mentioned by the instruction.
    pub fn regs(&self) -> Vec<Reg> {
        match *self {
            Instr::PutNode { reg, .. }
            | Instr::PutVar { reg, .. }
            | Instr::GetStructure { reg, .. }
            | Instr::GetVar { reg, .. }
            | Instr::UnifyVariable(reg)
            | Instr::UnifyValue(reg) => vec![reg],
            Instr::PutArc { reg, value, .. } => vec![reg, value],
            _ => Vec::new(),
        }
    }
}

/// Instructions with labeled entry points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodeArea {
    pub code: Vec<Instr>,
    pub labels: Vec<(String, usize)>,
}

impl CodeArea {
    /// Appends a labeled fragment and returns its entry address.
    pub fn push(&mut self, label: impl Into<String>, fragment: &[Instr]) -> usize {
        let at = self.code.len();
        self.labels.push((label.into(), at));
        self.code.extend_from_slice(fragment);
        at
    }

    pub fn label(&self, name: &str) -> Option<usize> {
        self.labels.iter().find(|(l, _)| l == name).map(|&(_, a)| a)
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty() && self.labels.is_empty()
    }
}

pub fn max_reg(code: &[Instr]) -> u32 {
    code.iter()
        .flat_map(Instr::regs)
        .map(|r| r.0)
        .max()
        .unwrap_or(0)
}

/// Nodes first (in equation order), then arcs (per equation, in offset
/// order).
pub fn compile_query(e: &EquationSet) -> Vec<Instr> {
    let mut nodes = Vec::new();
    let mut arcs = Vec::new();
    for eq in &e.equations {
        match &eq.rhs {
            Rhs::Node(args) => {
                nodes.push(Instr::PutNode {
                    ty: eq.ty,
                    arity: args.len(),
                    reg: eq.reg,
                });
                for (i, &value) in args.iter().enumerate() {
                    arcs.push(Instr::PutArc {
                        reg: eq.reg,
                        offset: i + 1,
                        value,
                    });
                }
            }
            Rhs::General => nodes.push(Instr::PutVar {
                ty: eq.ty,
                reg: eq.reg,
            }),
        }
    }
    nodes.extend(arcs);
    nodes
}

/// Program code for a structure whose root registers are already set.
pub fn compile_program(e: &EquationSet) -> Vec<Instr> {
    let mut seen: HashSet<Reg> = e.roots.iter().copied().collect();
    let mut out = Vec::new();
    program_code(&e.equations, &mut seen, &mut out);
    out
}

fn program_code(eqs: &[crate::terms::Equation], seen: &mut HashSet<Reg>, out: &mut Vec<Instr>) {
    for eq in eqs {
        seen.insert(eq.reg);
        match &eq.rhs {
            Rhs::Node(args) => {
                out.push(Instr::GetStructure {
                    ty: eq.ty,
                    arity: args.len(),
                    reg: eq.reg,
                });
                for &a in args {
                    out.push(if seen.insert(a) {
                        Instr::UnifyVariable(a)
                    } else {
                        Instr::UnifyValue(a)
                    });
                }
            }
            Rhs::General => out.push(Instr::GetVar {
                ty: eq.ty,
                reg: eq.reg,
            }),
        }
    }
}

/// One body element of a compiled rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementCode {
    /// Where matching of this element starts: the `start_rule` for the
    /// first element, the preceding `next_item` for the others.
    pub start_pc: usize,
    pub root: Reg,
    /// The root is shared with an earlier element, so the incoming
    /// structure must be unified with it rather than just named by it.
    pub root_is_back: bool,
    /// Registers holding structure from earlier elements that are still
    /// needed from this element on.
    pub live: Vec<Reg>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCode {
    pub name: String,
    pub code: Vec<Instr>,
    pub elements: Vec<ElementCode>,
    pub head_root: Reg,
    pub max_reg: u32,
}

impl RuleCode {
    pub fn arity(&self) -> usize {
        self.elements.len()
    }
}

/// `start_rule n`, then per body element its program code followed by
/// `move_dot` and `next_item`, then query code for the head and `end_rule`.
/// Registers are numbered across the whole rule.
pub fn compile_rule(name: &str, rule: &Mrs) -> RuleCode {
    assert!(
        rule.headed && rule.roots.len() >= 2,
        "a rule needs a body and a head"
    );
    let e = flatten_mrs(rule);
    let body = rule.roots.len() - 1;
    let mut code = vec![Instr::StartRule(body)];
    let mut seen: HashSet<Reg> = HashSet::new();
    let mut elements = Vec::new();
    for k in 0..body {
        let start_pc = if k == 0 { 0 } else { code.len() - 1 };
        let root = e.roots[k];
        let root_is_back = seen.contains(&root);
        let live_before: Vec<Reg> = {
            let mut v: Vec<Reg> = seen.iter().copied().collect();
            v.sort();
            v
        };
        seen.insert(root);
        program_code(e.root_equations(k), &mut seen, &mut code);
        code.push(Instr::MoveDot);
        code.push(Instr::NextItem);
        elements.push(ElementCode {
            start_pc,
            root,
            root_is_back,
            live: live_before,
        });
    }
    let head_root = e.roots[body];
    code.extend(compile_query(&EquationSet {
        equations: e.root_equations(body).to_vec(),
        roots: vec![head_root],
        spans: std::iter::once(0..e.spans[body].len()).collect(),
    }));
    code.push(Instr::EndRule);

    // keep only registers that the remaining code actually reads
    for k in 0..body {
        let from = elements[k].start_pc;
        let mut used: HashSet<Reg> = code[from..].iter().flat_map(Instr::regs).collect();
        used.insert(head_root);
        for el in &elements[k..] {
            used.insert(el.root);
        }
        elements[k].live.retain(|r| used.contains(r));
    }
    let max_reg = max_reg(&code).max(head_root.0);
    RuleCode {
        name: name.to_string(),
        code,
        elements,
        head_root,
        max_reg,
    }
}

/// Code that seeds the chart: per word an `advance` followed by query code
/// for each of its lexical entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InputCode {
    pub code: Vec<Instr>,
    /// Root register of every lexical entry, per word.
    pub roots: Vec<Vec<Reg>>,
}

/// Compiles the lexical structures of an input, one list of entries per
/// word. Registers of successive entries are disjoint.
pub fn compile_input(words: &[Vec<EquationSet>]) -> InputCode {
    let mut out = InputCode::default();
    let mut offset = 0;
    for entries in words {
        out.code.push(Instr::Advance);
        let mut roots = Vec::new();
        for e in entries {
            let e = e.shift(offset);
            out.code.extend(compile_query(&e));
            roots.push(e.roots[0]);
            offset = e.max_reg();
        }
        out.roots.push(roots);
    }
    out
}

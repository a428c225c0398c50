use std::collections::HashMap;

use super::{Addr, Cell, Halt, Machine, MachineError};
use crate::compiler::{compile_program, compile_query};
use crate::terms::{flatten, FsGraph, Node, Reg, Term};

impl Machine<'_> {
    /// Copies the structures rooted at `roots` into a graph, one graph root
    /// per address. Shared and cyclic nodes stay shared.
    pub fn extract(&mut self, roots: &[Addr]) -> Result<FsGraph, MachineError> {
        let mut ids: HashMap<Addr, usize> = HashMap::new();
        let mut g = FsGraph::default();
        let mut queue: Vec<Addr> = Vec::new();
        let mut id_of = |m: &mut Self, a: Addr, g: &mut FsGraph, queue: &mut Vec<Addr>| {
            let a = m.deref(a)?;
            Ok::<usize, MachineError>(*ids.entry(a).or_insert_with(|| {
                g.nodes.push(Node::Unknown);
                queue.push(a);
                g.nodes.len() - 1
            }))
        };
        for &r in roots {
            let id = id_of(self, r, &mut g, &mut queue)?;
            g.roots.push(id);
        }
        let mut done = 0;
        while done < queue.len() {
            let a = queue[done];
            let id = done;
            done += 1;
            g.nodes[id] = match self.heap[a] {
                Cell::Str(ty) => {
                    let mut args = Vec::new();
                    for i in 1..=self.h.arity(ty) {
                        args.push(id_of(self, a + i, &mut g, &mut queue)?);
                    }
                    Node::Full { ty, args }
                }
                Cell::Var(ty) => Node::General { ty },
                Cell::Ref(_) => Node::Unknown,
                Cell::Unset => return Err(MachineError::UnsetCell(a)),
            };
        }
        Ok(g)
    }

    pub fn extract_reg(&mut self, r: Reg) -> Result<FsGraph, MachineError> {
        let a = self.reg(r)?;
        self.extract(&[a])
    }

    /// Builds a copy of `g` on the heap and returns the root addresses.
    pub fn load(&mut self, g: &FsGraph) -> Result<Vec<Addr>, MachineError> {
        let order = g.reachable();
        let mut addr = vec![usize::MAX; g.nodes.len()];
        for &v in &order {
            addr[v] = match &g.nodes[v] {
                Node::Full { ty, args } => {
                    let a = self.push_cell(Cell::Str(*ty));
                    self.heap
                        .extend(std::iter::repeat_n(Cell::Unset, args.len()));
                    a
                }
                Node::General { ty } => self.new_general(*ty),
                Node::Unknown => {
                    let a = self.heap.len();
                    self.push_cell(Cell::Ref(a))
                }
            };
        }
        for &v in &order {
            if let Node::Full { args, .. } = &g.nodes[v] {
                for (i, &child) in args.iter().enumerate() {
                    self.heap[addr[v] + 1 + i] = Cell::Ref(addr[child]);
                }
            }
        }
        Ok(g.roots.iter().map(|&r| addr[r]).collect())
    }
}

/// Builds `query` on the heap with query code, runs program code for
/// `program` against it, and extracts the result. `None` means the
/// structures do not unify.
pub fn unify_terms(
    m: &mut Machine,
    query: &Term,
    program: &Term,
) -> Result<Option<FsGraph>, MachineError> {
    let q = compile_query(&flatten(query));
    let p = compile_program(&flatten(program));
    m.exec(&q, 0)?;
    let root = m.reg(Reg(1))?;
    match m.exec(&p, 0)? {
        Halt::Failed => Ok(None),
        _ => Ok(Some(m.extract(&[root])?)),
    }
}

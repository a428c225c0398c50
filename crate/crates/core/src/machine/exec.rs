use super::{Action, Addr, Cell, Machine, MachineError};
use crate::compiler::Instr;
use crate::terms::Reg;
use crate::typesys::{FeatureOrigin, TypeId};

/// Why execution stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    /// Ran off the end of the code.
    End,
    /// Unification failed; the caller is expected to undo.
    Failed,
    Advance {
        next_pc: usize,
    },
    MoveDot {
        next_pc: usize,
    },
    EndRule {
        next_pc: usize,
    },
}

impl Machine<'_> {
    /// Runs `code` from `pc` until a control instruction, a failure, or the
    /// end of the code.
    pub fn exec(&mut self, code: &[Instr], mut pc: usize) -> Result<Halt, MachineError> {
        while pc < code.len() {
            let ins = code[pc];
            pc += 1;
            let ok = match ins {
                Instr::PutNode { ty, arity, reg } => {
                    self.put_node(ty, arity, reg);
                    true
                }
                Instr::PutVar { ty, reg } => {
                    let a = self.new_general(ty);
                    self.set_reg(reg, a);
                    true
                }
                Instr::PutArc { reg, offset, value } => {
                    self.put_arc(reg, offset, value)?;
                    true
                }
                Instr::GetStructure { ty, reg, .. } => self.get_structure(ty, reg)?,
                Instr::GetVar { ty, reg } => {
                    let a = self.reg(reg)?;
                    let v = self.new_general(ty);
                    self.unify(v, a)?
                }
                Instr::UnifyVariable(r) => {
                    let (_, a) = self.stack.pop().ok_or(MachineError::StackUnderflow)?;
                    self.set_reg(r, a);
                    true
                }
                Instr::UnifyValue(r) => {
                    let (action, a) = self.stack.pop().ok_or(MachineError::StackUnderflow)?;
                    let x = self.reg(r)?;
                    match action {
                        Action::Copy => {
                            let x = self.deref(x)?;
                            if a != x {
                                self.bind(a, x);
                            }
                            true
                        }
                        Action::Unify => self.unify(a, x)?,
                    }
                }
                Instr::StartRule(_) | Instr::NextItem => true,
                Instr::Advance => return self.halt(Halt::Advance { next_pc: pc }),
                Instr::MoveDot => return self.halt(Halt::MoveDot { next_pc: pc }),
                Instr::EndRule => return self.halt(Halt::EndRule { next_pc: pc }),
            };
            if !ok {
                self.stack.clear();
                return Ok(Halt::Failed);
            }
        }
        self.halt(Halt::End)
    }

    /// Runs query code with all node instructions before all arc
    /// instructions, whatever their order in `code`.
    pub fn exec_query_streams(&mut self, code: &[Instr]) -> Result<(), MachineError> {
        let (nodes, arcs): (Vec<Instr>, Vec<Instr>) = code
            .iter()
            .partition(|i| !matches!(i, Instr::PutArc { .. }));
        self.exec(&nodes, 0)?;
        self.exec(&arcs, 0)?;
        Ok(())
    }

    fn halt(&mut self, h: Halt) -> Result<Halt, MachineError> {
        if !self.stack.is_empty() {
            return Err(MachineError::StackNotEmpty(self.stack.len()));
        }
        Ok(h)
    }

    pub fn put_node(&mut self, ty: TypeId, arity: usize, reg: Reg) -> Addr {
        let a = self.push_cell(Cell::Str(ty));
        self.heap.extend(std::iter::repeat_n(Cell::Unset, arity));
        self.set_reg(reg, a);
        a
    }

    pub fn put_arc(&mut self, reg: Reg, offset: usize, value: Reg) -> Result<(), MachineError> {
        let a = self.reg(reg)?;
        let v = self.reg(value)?;
        self.write(a + offset, Cell::Ref(v));
        Ok(())
    }

    /// Returns `false` on unification failure.
    pub fn get_structure(&mut self, ty: TypeId, reg: Reg) -> Result<bool, MachineError> {
        let mut addr = self.deref(self.reg(reg)?)?;
        self.set_reg(reg, addr);
        loop {
            match self.heap[addr] {
                Cell::Ref(_) => {
                    // unknown value: build a fresh skeleton whose arcs are
                    // filled in by the following unify instructions
                    let n = self.h.arity(ty);
                    let h0 = self.push_cell(Cell::Str(ty));
                    for j in 1..=n {
                        self.push_cell(Cell::Ref(h0 + j));
                    }
                    self.bind(addr, h0);
                    for j in (1..=n).rev() {
                        self.stack.push((Action::Copy, h0 + j));
                    }
                    return Ok(true);
                }
                Cell::Str(right) => return Ok(self.apply_plan(ty, right, addr)),
                Cell::Var(t) => {
                    let b = self.build_most_general(t);
                    self.bind(addr, b);
                    addr = b;
                }
                Cell::Unset => return Err(MachineError::UnsetCell(addr)),
            }
        }
    }

    /// Unifies a program node of type `left` into the heap node at `addr`,
    /// leaving one stack entry per feature of `left`, popped in feature
    /// order.
    fn apply_plan(&mut self, left: TypeId, right: TypeId, addr: Addr) -> bool {
        let h = self.h;
        let plan = h.plan(left, right);
        let Some(result) = plan.result else {
            return false;
        };
        if plan.is_noop() {
            for step in plan.steps.iter().rev() {
                if let FeatureOrigin::Both(k) = *step {
                    self.stack.push((Action::Unify, addr + k));
                }
            }
            return true;
        }
        let h0 = self.reserve_node(result);
        for (idx, step) in plan.steps.iter().enumerate() {
            let slot = h0 + 1 + idx;
            match *step {
                FeatureOrigin::RightOnly(k) | FeatureOrigin::Both(k) => {
                    self.heap[slot] = Cell::Ref(addr + k)
                }
                FeatureOrigin::LeftOnly => self.heap[slot] = Cell::Ref(slot),
                FeatureOrigin::Introduced(v) => self.fill_general(slot, v),
            }
        }
        for (idx, step) in plan.steps.iter().enumerate().rev() {
            let slot = h0 + 1 + idx;
            match step {
                FeatureOrigin::LeftOnly => self.stack.push((Action::Copy, slot)),
                FeatureOrigin::Both(_) => self.stack.push((Action::Unify, slot)),
                _ => {}
            }
        }
        self.bind(addr, h0);
        true
    }

    /// Pushes `STR ty` and reserves its arc cells.
    fn reserve_node(&mut self, ty: TypeId) -> Addr {
        let h0 = self.push_cell(Cell::Str(ty));
        self.heap
            .extend(std::iter::repeat_n(Cell::Unset, self.h.arity(ty)));
        h0
    }

    /// Unifies the structures at `a1` and `a2`. Returns `false` on failure,
    /// leaving partial bindings for the caller to undo.
    ///
    /// Both operands are bound to the result before their arcs are visited,
    /// so revisiting a pair through a cycle finds them already identical.
    pub fn unify(&mut self, a1: Addr, a2: Addr) -> Result<bool, MachineError> {
        let h = self.h;
        let mut work = vec![(a1, a2)];
        while let Some((x, y)) = work.pop() {
            let x = self.deref(x)?;
            let y = self.deref(y)?;
            if x == y {
                continue;
            }
            match (self.heap[x], self.heap[y]) {
                (Cell::Ref(_), _) => self.bind(x, y),
                (_, Cell::Ref(_)) => self.bind(y, x),
                (Cell::Var(t1), Cell::Var(t2)) => {
                    let Some(r) = h.lub(t1, t2) else {
                        return Ok(false);
                    };
                    if r != t2 {
                        self.write(y, Cell::Var(r));
                    }
                    self.bind(x, y);
                }
                (Cell::Var(t), Cell::Str(_)) => {
                    if !self.absorb_general(t, x, y) {
                        return Ok(false);
                    }
                }
                (Cell::Str(_), Cell::Var(t)) => {
                    if !self.absorb_general(t, y, x) {
                        return Ok(false);
                    }
                }
                (Cell::Str(t1), Cell::Str(t2)) => {
                    let plan = h.plan(t1, t2);
                    let Some(result) = plan.result else {
                        return Ok(false);
                    };
                    if plan.is_noop() {
                        let mut i = 0;
                        for step in &plan.steps {
                            if let FeatureOrigin::Both(k) = *step {
                                i += 1;
                                work.push((x + i, y + k));
                            }
                        }
                        self.bind(x, y);
                        continue;
                    }
                    let h0 = self.reserve_node(result);
                    let mut i = 0;
                    for (idx, step) in plan.steps.iter().enumerate() {
                        let slot = h0 + 1 + idx;
                        match *step {
                            FeatureOrigin::RightOnly(k) => self.heap[slot] = Cell::Ref(y + k),
                            FeatureOrigin::LeftOnly => {
                                i += 1;
                                self.heap[slot] = Cell::Ref(x + i);
                            }
                            FeatureOrigin::Both(k) => {
                                i += 1;
                                self.heap[slot] = Cell::Ref(y + k);
                                work.push((slot, x + i));
                            }
                            FeatureOrigin::Introduced(v) => self.fill_general(slot, v),
                        }
                    }
                    self.bind(y, h0);
                    self.bind(x, h0);
                }
                (Cell::Unset, _) => return Err(MachineError::UnsetCell(x)),
                (_, Cell::Unset) => return Err(MachineError::UnsetCell(y)),
            }
        }
        Ok(true)
    }

    /// Unifies the most general structure of `t` (the `VAR` cell at `var`)
    /// with the node at `node`. Values already present at `node` are at
    /// least as specific as the appropriate types, so only the node's type
    /// and missing features change.
    fn absorb_general(&mut self, t: TypeId, var: Addr, node: Addr) -> bool {
        let h = self.h;
        let Cell::Str(right) = self.heap[node] else {
            unreachable!("absorb_general on a non-node")
        };
        let plan = h.plan(t, right);
        let Some(result) = plan.result else {
            return false;
        };
        if plan.is_noop() {
            self.bind(var, node);
            return true;
        }
        let h0 = self.reserve_node(result);
        for (idx, step) in plan.steps.iter().enumerate() {
            let slot = h0 + 1 + idx;
            match *step {
                FeatureOrigin::RightOnly(k) | FeatureOrigin::Both(k) => {
                    self.heap[slot] = Cell::Ref(node + k)
                }
                FeatureOrigin::LeftOnly => self.fill_general(slot, h.approp_at(result, idx)),
                FeatureOrigin::Introduced(v) => self.fill_general(slot, v),
            }
        }
        self.bind(node, h0);
        self.bind(var, h0);
        true
    }

    /// `STR t` followed by `VAR` cells for its appropriate values.
    pub fn build_most_general(&mut self, t: TypeId) -> Addr {
        let h0 = self.push_cell(Cell::Str(t));
        for i in 0..self.h.arity(t) {
            self.push_cell(Cell::Var(self.h.approp_at(t, i)));
        }
        h0
    }

    /// Fully expanded most general structure; terminates only on
    /// hierarchies without appropriateness loops.
    fn build_expanded(&mut self, t: TypeId) -> Addr {
        let h0 = self.reserve_node(t);
        for i in 0..self.h.arity(t) {
            let v = self.build_expanded(self.h.approp_at(t, i));
            self.heap[h0 + 1 + i] = Cell::Ref(v);
        }
        h0
    }

    /// A most general structure of `t`: a `VAR` cell, or its expansion in
    /// eager mode.
    pub(crate) fn new_general(&mut self, t: TypeId) -> Addr {
        if self.cfg.lazy {
            self.push_cell(Cell::Var(t))
        } else {
            self.build_expanded(t)
        }
    }

    fn fill_general(&mut self, slot: Addr, t: TypeId) {
        if self.cfg.lazy {
            self.heap[slot] = Cell::Var(t);
        } else {
            let v = self.build_expanded(t);
            self.heap[slot] = Cell::Ref(v);
        }
    }
}

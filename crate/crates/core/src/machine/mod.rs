//! The abstract machine: a tagged-cell heap, a register file, the action
//! stack used by program code, and a trail for undoing destructive writes.
//!
//! A node of type `t` with arity `n` occupies `n + 1` consecutive cells: an
//! `STR t` cell followed by one cell per arc. Arc cells are `REF`s to the
//! value, a self-`REF` for a value not yet known, or `VAR t` for the
//! unexpanded most general structure of `t`.

mod exec;
mod io;

use std::fmt;

use thiserror::Error;

use crate::terms::Reg;
use crate::typesys::{TypeHierarchy, TypeId};

pub use exec::Halt;
pub use io::unify_terms;

pub type Addr = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Str(TypeId),
    Ref(Addr),
    Var(TypeId),
    /// Reserved by `put_node` and not yet written by `put_arc`.
    Unset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Copy,
    Unify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineConfig {
    /// Represent introduced features by `VAR` cells instead of building
    /// their most general structures immediately.
    pub lazy: bool,
    pub path_compression: bool,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            lazy: true,
            path_compression: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("cell {0} was read before it was written")]
    UnsetCell(Addr),
    #[error("register {0} is not set")]
    UnsetRegister(Reg),
    #[error("action stack underflow")]
    StackUnderflow,
    #[error("action stack holds {0} entries at a halt")]
    StackNotEmpty(usize),
    #[error("eager expansion does not terminate on a hierarchy with appropriateness loops")]
    EagerLoop,
    #[error("checkpoints must be released in reverse order")]
    BadMark,
}

/// Handle for a checkpoint; see [`Machine::checkpoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark(usize);

#[derive(Debug, Clone)]
struct MarkData {
    heap_len: usize,
    trail_len: usize,
    regs: Vec<Option<Addr>>,
}

pub struct Machine<'h> {
    h: &'h TypeHierarchy,
    cfg: MachineConfig,
    heap: Vec<Cell>,
    regs: Vec<Option<Addr>>,
    stack: Vec<(Action, Addr)>,
    trail: Vec<(Addr, Cell)>,
    marks: Vec<MarkData>,
}

impl<'h> Machine<'h> {
    pub fn new(h: &'h TypeHierarchy) -> Self {
        Self::with_config(h, MachineConfig::default()).expect("lazy machines always work")
    }

    pub fn with_config(h: &'h TypeHierarchy, cfg: MachineConfig) -> Result<Self, MachineError> {
        if !cfg.lazy && h.has_appropriateness_loop() {
            return Err(MachineError::EagerLoop);
        }
        Ok(Machine {
            h,
            cfg,
            heap: Vec::new(),
            regs: Vec::new(),
            stack: Vec::new(),
            trail: Vec::new(),
            marks: Vec::new(),
        })
    }

    pub fn hierarchy(&self) -> &'h TypeHierarchy {
        self.h
    }

    pub fn config(&self) -> MachineConfig {
        self.cfg
    }

    pub fn heap(&self) -> &[Cell] {
        &self.heap
    }

    pub fn stack_len(&self) -> usize {
        self.stack.len()
    }

    pub fn reg(&self, r: Reg) -> Result<Addr, MachineError> {
        self.regs
            .get(r.index())
            .copied()
            .flatten()
            .ok_or(MachineError::UnsetRegister(r))
    }

    pub fn set_reg(&mut self, r: Reg, a: Addr) {
        if self.regs.len() <= r.index() {
            self.regs.resize(r.index() + 1, None);
        }
        self.regs[r.index()] = Some(a);
    }

    pub fn clear_regs(&mut self) {
        self.regs.clear();
    }

    /// Empties heap, registers, stack and trail. Outstanding marks become
    /// invalid.
    pub fn reset(&mut self) {
        self.heap.clear();
        self.regs.clear();
        self.stack.clear();
        self.trail.clear();
        self.marks.clear();
    }

    fn push_cell(&mut self, c: Cell) -> Addr {
        self.heap.push(c);
        self.heap.len() - 1
    }

    /// Destructive write, trailed while a checkpoint is active.
    fn write(&mut self, a: Addr, c: Cell) {
        if !self.marks.is_empty() {
            self.trail.push((a, self.heap[a]));
        }
        self.heap[a] = c;
    }

    pub fn bind(&mut self, a: Addr, target: Addr) {
        self.write(a, Cell::Ref(target));
    }

    /// Follows `REF` chains to a `STR`, `VAR` or self-`REF` cell.
    pub fn deref(&mut self, a: Addr) -> Result<Addr, MachineError> {
        let mut cur = a;
        loop {
            match self.heap[cur] {
                Cell::Ref(next) if next != cur => cur = next,
                Cell::Unset => return Err(MachineError::UnsetCell(cur)),
                _ => break,
            }
        }
        if self.cfg.path_compression {
            let mut at = a;
            while at != cur {
                let Cell::Ref(next) = self.heap[at] else {
                    break;
                };
                if next != cur {
                    self.write(at, Cell::Ref(cur));
                }
                at = next;
            }
        }
        Ok(cur)
    }

    /// Number of `REF` hops from `a` to its dereferenced cell.
    pub fn chain_length(&self, a: Addr) -> usize {
        let mut n = 0;
        let mut cur = a;
        while let Cell::Ref(next) = self.heap[cur] {
            if next == cur {
                break;
            }
            cur = next;
            n += 1;
        }
        n
    }

    /// Records the current state. Marks nest and are undone in reverse
    /// order.
    pub fn checkpoint(&mut self) -> Mark {
        self.marks.push(MarkData {
            heap_len: self.heap.len(),
            trail_len: self.trail.len(),
            regs: self.regs.clone(),
        });
        Mark(self.marks.len() - 1)
    }

    /// Restores heap, registers and the heap top to their state at `mark`,
    /// and releases it.
    pub fn undo(&mut self, mark: Mark) -> Result<(), MachineError> {
        if mark.0 + 1 != self.marks.len() {
            return Err(MachineError::BadMark);
        }
        let data = self.marks.pop().unwrap();
        while self.trail.len() > data.trail_len {
            let (a, c) = self.trail.pop().unwrap();
            self.heap[a] = c;
        }
        self.heap.truncate(data.heap_len);
        self.regs = data.regs;
        self.stack.clear();
        if self.marks.is_empty() {
            self.trail.clear();
        }
        Ok(())
    }

    /// Releases `mark` keeping all changes made since.
    pub fn commit(&mut self, mark: Mark) -> Result<(), MachineError> {
        if mark.0 + 1 != self.marks.len() {
            return Err(MachineError::BadMark);
        }
        self.marks.pop();
        if self.marks.is_empty() {
            self.trail.clear();
        }
        Ok(())
    }

    /// One line per cell, `addr: TAG content`, numbering from `base`.
    pub fn dump_heap(&self, base: usize) -> String {
        let mut out = String::new();
        for (a, c) in self.heap.iter().enumerate() {
            out.push_str(&format!("{}: {}\n", a + base, CellDisplay(c, self.h, base)));
        }
        out
    }
}

struct CellDisplay<'a>(&'a Cell, &'a TypeHierarchy, usize);

impl fmt::Display for CellDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.0 {
            Cell::Str(t) => write!(f, "STR {}", self.1.type_name(t)),
            Cell::Ref(a) => write!(f, "REF {}", a + self.2),
            Cell::Var(t) => write!(f, "VAR {}", self.1.type_name(t)),
            Cell::Unset => f.write_str("---"),
        }
    }
}

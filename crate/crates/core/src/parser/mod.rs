//! Bottom-up chart parsing with compiled rules.
//!
//! Items are edges over input positions `0..=n`. Lexical edges seed cells
//! `(i, i+1)`; every rule starts as an initial edge in every diagonal cell
//! `(i, i)`. Popping an edge from the agenda combines it with every
//! compatible edge already in the chart (the fundamental rule): a complete
//! edge at `(k, j)` is tried against active edges in `(k, k)` down to
//! `(0, k)`, an active edge at `(i, k)` against complete edges starting at
//! `k`. The agenda is first in, first out, so derivations are explored
//! breadth first, and an edge equal to one seen before is dropped, which
//! makes the computation reach a fixed point.
//!
//! Edges are immutable snapshots. Each combination runs between a
//! checkpoint and an undo of the machine, so nothing on the heap survives
//! it.

mod grammar;

use std::collections::{HashSet, VecDeque};
use std::fmt::Write;

use thiserror::Error;

use crate::compiler::{
    compile_input, compile_program, compile_query, compile_rule, CodeArea, Instr, RuleCode,
};
use crate::machine::{Halt, Machine, MachineConfig, MachineError};
use crate::terms::{flatten, FsGraph, Reg, Term};
use crate::typesys::TypeHierarchy;

pub use grammar::{Grammar, GrammarError, LexEntry, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParserConfig {
    pub max_items: usize,
    /// Maximum number of agenda pops.
    pub max_steps: usize,
    /// Compare the whole heap with its checkpoint after every rule
    /// application and start-symbol test.
    pub verify_undo: bool,
    pub machine: MachineConfig,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            max_items: 100_000,
            max_steps: 1_000_000,
            verify_undo: false,
            machine: MachineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("{what} limit of {limit} exceeded")]
    LimitExceeded { what: &'static str, limit: usize },
    #[error("heap differs from its checkpoint after applying rule `{0}`")]
    UndoMismatch(String),
    #[error("unexpected halt {0:?} in rule `{1}`")]
    UnexpectedHalt(Halt, String),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Origin {
    /// The `entry`-th lexical entry of `word` (or an input structure).
    Lex {
        word: String,
        entry: usize,
    },
    Rule(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EdgeState {
    /// `dot` body elements matched; `regs` holds the structures of the
    /// registers the rest of the rule reads, one root per live register.
    Active {
        dot: usize,
        regs: FsGraph,
    },
    Complete {
        head: FsGraph,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub origin: Origin,
    pub state: EdgeState,
}

impl Edge {
    pub fn head(&self) -> Option<&FsGraph> {
        match &self.state {
            EdgeState::Complete { head } => Some(head),
            EdgeState::Active { .. } => None,
        }
    }
}

pub type EdgeId = usize;

#[derive(Debug, Clone)]
pub struct ParseResult {
    pub n: usize,
    pub edges: Vec<Edge>,
    /// Complete edges spanning the whole input.
    pub spanning: Vec<EdgeId>,
    /// Spanning edges whose head is subsumed by the start structure.
    pub accepted: Vec<EdgeId>,
    /// Agenda pops until the fixed point.
    pub steps: usize,
    /// Number of heap comparisons made with `verify_undo`.
    pub undo_checks: usize,
}

impl ParseResult {
    pub fn is_accepted(&self) -> bool {
        !self.accepted.is_empty()
    }

    pub fn heads(&self) -> Vec<Term> {
        self.accepted
            .iter()
            .filter_map(|&e| self.edges[e].head()?.to_term())
            .collect()
    }

    pub fn edge_label(&self, e: EdgeId, rules: &[RuleCode], h: &TypeHierarchy) -> String {
        let edge = &self.edges[e];
        let name = match &edge.origin {
            Origin::Lex { word, .. } => format!("lex {word}"),
            Origin::Rule(r) => rules[*r].name.clone(),
        };
        match &edge.state {
            EdgeState::Active { dot, .. } => format!("{name} @ {dot}"),
            EdgeState::Complete { head } => match head.to_term() {
                Some(t) => format!("{name}: {}", t.display(h)),
                None => format!("{name}: ?"),
            },
        }
    }

    /// One line per edge, `(i,j) label`, ordered by cell.
    pub fn chart_dump(&self, rules: &[RuleCode], h: &TypeHierarchy) -> String {
        let mut ids: Vec<EdgeId> = (0..self.edges.len()).collect();
        ids.sort_by_key(|&e| (self.edges[e].i, self.edges[e].j, e));
        let mut out = String::new();
        for e in ids {
            let edge = &self.edges[e];
            let _ = writeln!(
                out,
                "({},{}) {}",
                edge.i,
                edge.j,
                self.edge_label(e, rules, h)
            );
        }
        out
    }
}

/// A grammar compiled for parsing.
pub struct Parser<'g> {
    grammar: &'g Grammar,
    rules: Vec<RuleCode>,
    start: Option<Vec<Instr>>,
    cfg: ParserConfig,
}

type Key = (usize, usize, Origin, Option<usize>, FsGraph);

struct Run<'p, 'g, 'h> {
    p: &'p Parser<'g>,
    m: Machine<'h>,
    edges: Vec<Edge>,
    cells: Vec<Vec<Vec<EdgeId>>>,
    seen: HashSet<Key>,
    agenda: VecDeque<EdgeId>,
    undo_checks: usize,
}

impl<'g> Parser<'g> {
    pub fn new(grammar: &'g Grammar, cfg: ParserConfig) -> Self {
        let rules = grammar
            .rules
            .iter()
            .map(|r| compile_rule(&r.name, &r.mrs))
            .collect();
        let start = grammar.start.as_ref().map(|s| compile_program(&flatten(s)));
        Parser {
            grammar,
            rules,
            start,
            cfg,
        }
    }

    pub fn rules(&self) -> &[RuleCode] {
        &self.rules
    }

    pub fn hierarchy(&self) -> &'g TypeHierarchy {
        &self.grammar.hierarchy
    }

    /// All compiled code: rules, lexical entries (labeled `lex word` or
    /// `lex word/k` for further entries) and the start program.
    pub fn code_area(&self) -> CodeArea {
        let mut area = CodeArea::default();
        for r in &self.rules {
            area.push(r.name.clone(), &r.code);
        }
        let mut counts: std::collections::HashMap<&str, usize> = Default::default();
        for e in &self.grammar.lexicon {
            let k = counts.entry(e.word.as_str()).or_default();
            *k += 1;
            let label = if *k == 1 {
                format!("lex {}", e.word)
            } else {
                format!("lex {}/{k}", e.word)
            };
            area.push(label, &compile_query(&flatten(&e.term)));
        }
        if let Some(s) = &self.start {
            area.push("start", s);
        }
        area
    }

    /// Parses a sequence of words. The lexical structures are built on the
    /// heap by compiled input code (`advance` followed by query code for
    /// each entry of the word).
    pub fn parse(&self, words: &[&str]) -> Result<ParseResult, ParseError> {
        if words.is_empty() {
            return Err(ParseError::EmptyInput);
        }
        let mut per_word = Vec::new();
        for w in words {
            let entries: Vec<_> = self.grammar.entries(w).map(|e| flatten(&e.term)).collect();
            if entries.is_empty() {
                return Err(ParseError::UnknownWord(w.to_string()));
            }
            per_word.push(entries);
        }
        let input = compile_input(&per_word);
        let mut m = Machine::with_config(self.hierarchy(), self.cfg.machine)?;
        let mut lexical: Vec<Vec<(String, FsGraph)>> = Vec::new();
        let mut pc = 0;
        let mut collect = |m: &mut Machine, k: usize| -> Result<(), MachineError> {
            let mut entries = Vec::new();
            for &r in &input.roots[k] {
                entries.push((words[k].to_string(), m.extract_reg(r)?));
            }
            lexical.push(entries);
            Ok(())
        };
        let mut word = 0;
        loop {
            match m.exec(&input.code, pc)? {
                Halt::Advance { next_pc } => {
                    if word > 0 {
                        collect(&mut m, word - 1)?;
                    }
                    word += 1;
                    pc = next_pc;
                }
                Halt::End => {
                    collect(&mut m, word - 1)?;
                    break;
                }
                other => return Err(ParseError::UnexpectedHalt(other, "input".into())),
            }
        }
        m.clear_regs();
        self.run(m, lexical)
    }

    /// Parses a sequence of ready-made structures, one per input position.
    pub fn parse_structures(&self, items: &[FsGraph]) -> Result<ParseResult, ParseError> {
        if items.is_empty() {
            return Err(ParseError::EmptyInput);
        }
        let m = Machine::with_config(self.hierarchy(), self.cfg.machine)?;
        let lexical = items
            .iter()
            .enumerate()
            .map(|(k, g)| vec![(format!("#{k}"), g.clone())])
            .collect();
        self.run(m, lexical)
    }

    fn run<'h>(
        &self,
        m: Machine<'h>,
        lexical: Vec<Vec<(String, FsGraph)>>,
    ) -> Result<ParseResult, ParseError> {
        let n = lexical.len();
        let mut run = Run {
            p: self,
            m,
            edges: Vec::new(),
            cells: vec![vec![Vec::new(); n + 1]; n + 1],
            seen: HashSet::new(),
            agenda: VecDeque::new(),
            undo_checks: 0,
        };
        for i in 0..n {
            for r in 0..self.rules.len() {
                let e = run.add(Edge {
                    i,
                    j: i,
                    origin: Origin::Rule(r),
                    state: EdgeState::Active {
                        dot: 0,
                        regs: FsGraph::default(),
                    },
                })?;
                if let Some(e) = e {
                    run.agenda.pop_back();
                    run.cells[i][i].push(e);
                }
            }
        }
        for (k, entries) in lexical.into_iter().enumerate() {
            for (entry, (word, head)) in entries.into_iter().enumerate() {
                run.add(Edge {
                    i: k,
                    j: k + 1,
                    origin: Origin::Lex { word, entry },
                    state: EdgeState::Complete { head },
                })?;
            }
        }

        let mut steps = 0;
        while let Some(e) = run.agenda.pop_front() {
            steps += 1;
            if steps > self.cfg.max_steps {
                return Err(ParseError::LimitExceeded {
                    what: "step",
                    limit: self.cfg.max_steps,
                });
            }
            let (i, j) = (run.edges[e].i, run.edges[e].j);
            run.cells[i][j].push(e);
            let mut pairs = Vec::new();
            match run.edges[e].state {
                EdgeState::Complete { .. } => {
                    for a_start in (0..=i).rev() {
                        for &a in &run.cells[a_start][i] {
                            if matches!(run.edges[a].state, EdgeState::Active { .. }) {
                                pairs.push((a, e));
                            }
                        }
                    }
                }
                EdgeState::Active { .. } => {
                    for end in j + 1..=n {
                        for &c in &run.cells[j][end] {
                            if matches!(run.edges[c].state, EdgeState::Complete { .. }) {
                                pairs.push((e, c));
                            }
                        }
                    }
                }
            }
            for (a, c) in pairs {
                if let Some(edge) = run.combine(a, c)? {
                    run.add(edge)?;
                }
            }
        }

        let spanning: Vec<EdgeId> = run.cells[0][n]
            .iter()
            .copied()
            .filter(|&e| run.edges[e].head().is_some())
            .collect();
        let mut accepted = Vec::new();
        for &e in &spanning {
            if run.start_accepts(e)? {
                accepted.push(e);
            }
        }
        Ok(ParseResult {
            n,
            edges: run.edges,
            spanning,
            accepted,
            steps,
            undo_checks: run.undo_checks,
        })
    }
}

impl Run<'_, '_, '_> {
    /// Records a new edge and queues it; duplicates are dropped.
    fn add(&mut self, edge: Edge) -> Result<Option<EdgeId>, ParseError> {
        let h = self.p.hierarchy();
        let key: Key = match &edge.state {
            EdgeState::Active { dot, regs } => (
                edge.i,
                edge.j,
                edge.origin.clone(),
                Some(*dot),
                regs.canonical(h),
            ),
            EdgeState::Complete { head } => {
                (edge.i, edge.j, edge.origin.clone(), None, head.canonical(h))
            }
        };
        if !self.seen.insert(key) {
            return Ok(None);
        }
        if self.edges.len() >= self.p.cfg.max_items {
            return Err(ParseError::LimitExceeded {
                what: "item",
                limit: self.p.cfg.max_items,
            });
        }
        self.edges.push(edge);
        let id = self.edges.len() - 1;
        self.agenda.push_back(id);
        Ok(Some(id))
    }

    /// The fundamental rule: extends the active edge `a` over the complete
    /// edge `c`.
    fn combine(&mut self, a: EdgeId, c: EdgeId) -> Result<Option<Edge>, ParseError> {
        let (EdgeState::Active { dot, regs }, Origin::Rule(r)) =
            (&self.edges[a].state, &self.edges[a].origin)
        else {
            unreachable!("combine needs an active edge");
        };
        let (dot, r) = (*dot, *r);
        let head = self.edges[c].head().expect("complete edge").clone();
        let regs = regs.clone();
        let p = self.p;
        let rule = &p.rules[r];

        let before = self.p.cfg.verify_undo.then(|| self.m.heap().to_vec());
        let mark = self.m.checkpoint();
        let state = self.apply(rule, dot, &regs, &head);
        self.m.undo(mark)?;
        if let Some(before) = before {
            self.undo_checks += 1;
            if self.m.heap() != &before[..] {
                return Err(ParseError::UndoMismatch(rule.name.clone()));
            }
        }
        Ok(state?.map(|state| Edge {
            i: self.edges[a].i,
            j: self.edges[c].j,
            origin: Origin::Rule(r),
            state,
        }))
    }

    fn apply(
        &mut self,
        rule: &RuleCode,
        dot: usize,
        regs: &FsGraph,
        head: &FsGraph,
    ) -> Result<Option<EdgeState>, ParseError> {
        let m = &mut self.m;
        let el = &rule.elements[dot];
        m.clear_regs();
        if !el.live.is_empty() {
            let addrs = m.load(regs)?;
            for (&reg, a) in el.live.iter().zip(addrs) {
                m.set_reg(reg, a);
            }
        }
        let h = m.load(head)?[0];
        if el.root_is_back {
            let root = m.reg(el.root)?;
            if !m.unify(root, h)? {
                return Ok(None);
            }
        } else {
            m.set_reg(el.root, h);
        }
        match m.exec(&rule.code, el.start_pc)? {
            Halt::Failed => Ok(None),
            Halt::MoveDot { next_pc } => {
                if dot + 1 < rule.arity() {
                    let live = &rule.elements[dot + 1].live;
                    let addrs = live
                        .iter()
                        .map(|&r| m.reg(r))
                        .collect::<Result<Vec<_>, _>>()?;
                    let regs = m.extract(&addrs)?;
                    return Ok(Some(EdgeState::Active { dot: dot + 1, regs }));
                }
                match m.exec(&rule.code, next_pc)? {
                    Halt::EndRule { .. } => {
                        let a = m.reg(rule.head_root)?;
                        Ok(Some(EdgeState::Complete {
                            head: m.extract(&[a])?,
                        }))
                    }
                    Halt::Failed => Ok(None),
                    other => Err(ParseError::UnexpectedHalt(other, rule.name.clone())),
                }
            }
            other => Err(ParseError::UnexpectedHalt(other, rule.name.clone())),
        }
    }

    /// The start structure subsumes `A` iff unifying it into `A` leaves `A`
    /// unchanged.
    fn start_accepts(&mut self, e: EdgeId) -> Result<bool, ParseError> {
        let p = self.p;
        let Some(start) = &p.start else {
            return Ok(true);
        };
        let head = self.edges[e].head().expect("complete edge").clone();
        let before = self.p.cfg.verify_undo.then(|| self.m.heap().to_vec());
        let mark = self.m.checkpoint();
        let result = (|| -> Result<bool, ParseError> {
            let a = self.m.load(&head)?[0];
            self.m.clear_regs();
            self.m.set_reg(Reg(1), a);
            match self.m.exec(start, 0)? {
                Halt::End => Ok(self.m.extract(&[a])?.iso(&head, p.hierarchy())),
                _ => Ok(false),
            }
        })();
        self.m.undo(mark)?;
        if let Some(before) = before {
            self.undo_checks += 1;
            if self.m.heap() != &before[..] {
                return Err(ParseError::UndoMismatch("start".into()));
            }
        }
        result
    }
}

//! Shared test support: random hierarchies and structures, and a
//! brute-force graph unifier that knows nothing about the heap.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tfsam::machine::unify_terms;
use tfsam::terms::{FsGraph, Mrs, Node};
use tfsam::typesys::FeatureId;
use tfsam::{Machine, MachineConfig, Term, TypeHierarchy, TypeId};

pub const MAX_TYPES: usize = 12;
pub const MAX_NODES: usize = 8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Source text of a random hierarchy: every type below `bot` gets one
/// earlier parent and sometimes a second, and each feature is introduced
/// exactly once with a fixed value type. Not every draw is bounded
/// complete; see [`random_hierarchy`].
pub fn random_hierarchy_source(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(2..=MAX_TYPES);
    let names: Vec<String> = (0..n)
        .map(|i| {
            if i == 0 {
                "bot".into()
            } else {
                format!("t{i}")
            }
        })
        .collect();
    let mut subs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..n {
        let p = rng.gen_range(0..i);
        subs[p].push(i);
        if i > 2 && rng.gen_bool(0.2) {
            let q = rng.gen_range(1..i);
            if q != p && !subs[q].contains(&i) {
                subs[q].push(i);
            }
        }
    }
    let mut intro: Vec<Vec<(String, usize)>> = vec![Vec::new(); n];
    for k in 0..rng.gen_range(0..=5) {
        let at = rng.gen_range(1..n);
        let value = rng.gen_range(0..n);
        intro[at].push((format!("f{k}"), value));
    }
    let mut out = String::new();
    for i in 0..n {
        let s: Vec<&str> = subs[i].iter().map(|&j| names[j].as_str()).collect();
        out.push_str(&format!("{} sub [{}]", names[i], s.join(",")));
        if !intro[i].is_empty() {
            let fs: Vec<String> = intro[i]
                .iter()
                .map(|(f, v)| format!("{f}:{}", names[*v]))
                .collect();
            out.push_str(&format!(" intro [{}]", fs.join(",")));
        }
        out.push_str(".\n");
    }
    out
}

/// Draws until the validator accepts.
pub fn random_hierarchy(rng: &mut impl Rng) -> (String, TypeHierarchy) {
    loop {
        let src = random_hierarchy_source(rng);
        if let Ok(h) = TypeHierarchy::from_source(&src) {
            return (src, h);
        }
    }
}

pub fn loop_free_hierarchy(rng: &mut impl Rng) -> TypeHierarchy {
    loop {
        let (_, h) = random_hierarchy(rng);
        if !h.has_appropriateness_loop() {
            return h;
        }
    }
}

fn subtypes_of(h: &TypeHierarchy, t: TypeId) -> Vec<TypeId> {
    h.types().filter(|&u| h.subsumes(t, u)).collect()
}

struct GraphGen<'a, R> {
    h: &'a TypeHierarchy,
    rng: &'a mut R,
    nodes: Vec<Node>,
    pending: Vec<usize>,
}

impl<R: Rng> GraphGen<'_, R> {
    fn fresh(&mut self, ty: TypeId) -> usize {
        let v = self.nodes.len();
        if self.h.arity(ty) == 0 {
            self.nodes.push(Node::Full {
                ty,
                args: Vec::new(),
            });
        } else if self.nodes.len() + 1 >= MAX_NODES || self.rng.gen_bool(0.15) {
            self.nodes.push(Node::General { ty });
        } else {
            self.nodes.push(Node::Full {
                ty,
                args: Vec::new(),
            });
            self.pending.push(v);
        }
        v
    }

    fn value(&mut self, want: TypeId) -> usize {
        let h = self.h;
        let shared: Vec<usize> = (0..self.nodes.len())
            .filter(|&v| self.nodes[v].ty().is_some_and(|t| h.subsumes(want, t)))
            .collect();
        if !shared.is_empty() && (self.nodes.len() >= MAX_NODES || self.rng.gen_bool(0.3)) {
            return *shared.choose(self.rng).unwrap();
        }
        let ty = *subtypes_of(h, want).choose(self.rng).unwrap();
        self.fresh(ty)
    }
}

/// A random totally well-typed graph with `roots` roots. Nodes may be
/// shared between roots and arcs, and cycles are allowed.
pub fn random_graph(rng: &mut impl Rng, h: &TypeHierarchy, roots: usize) -> FsGraph {
    loop {
        let mut g = GraphGen {
            h,
            rng: &mut *rng,
            nodes: Vec::new(),
            pending: Vec::new(),
        };
        let mut rs = Vec::new();
        for _ in 0..roots {
            let r = if !g.nodes.is_empty() && g.rng.gen_bool(0.2) {
                g.rng.gen_range(0..g.nodes.len())
            } else {
                let ty = TypeId(g.rng.gen_range(0..h.type_count() as u32));
                g.fresh(ty)
            };
            rs.push(r);
        }
        let mut i = 0;
        while i < g.pending.len() {
            let v = g.pending[i];
            i += 1;
            let Some(ty) = g.nodes[v].ty() else {
                unreachable!()
            };
            let args: Vec<usize> = (0..h.arity(ty))
                .map(|k| g.value(h.approp_at(ty, k)))
                .collect();
            g.nodes[v] = Node::Full { ty, args };
        }
        if g.nodes.len() <= MAX_NODES {
            return FsGraph {
                nodes: g.nodes,
                roots: rs,
            };
        }
    }
}

pub fn random_term(rng: &mut impl Rng, h: &TypeHierarchy) -> Term {
    random_graph(rng, h, 1).to_term().unwrap()
}

pub fn random_mrs(rng: &mut impl Rng, h: &TypeHierarchy, roots: usize) -> Mrs {
    Mrs {
        roots: random_graph(rng, h, roots).to_terms().unwrap(),
        headed: true,
    }
}

pub fn is_cyclic(g: &FsGraph) -> bool {
    fn visit(g: &FsGraph, v: usize, state: &mut [u8]) -> bool {
        match state[v] {
            1 => return true,
            2 => return false,
            _ => {}
        }
        state[v] = 1;
        if let Node::Full { args, .. } = &g.nodes[v] {
            if args.iter().any(|&a| visit(g, a, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    let mut state = vec![0u8; g.nodes.len()];
    g.roots.iter().any(|&r| visit(g, r, &mut state))
}

/// Union-find unifier over explicit graphs. A class without arcs stands for
/// the most general structure of its type; arcs are added on demand.
pub struct Oracle<'h> {
    h: &'h TypeHierarchy,
    parent: Vec<usize>,
    ty: Vec<TypeId>,
    arcs: Vec<Option<BTreeMap<FeatureId, usize>>>,
}

impl<'h> Oracle<'h> {
    pub fn new(h: &'h TypeHierarchy) -> Self {
        Oracle {
            h,
            parent: Vec::new(),
            ty: Vec::new(),
            arcs: Vec::new(),
        }
    }

    fn add_graph(&mut self, g: &FsGraph) -> Vec<usize> {
        let base = self.parent.len();
        for (i, n) in g.nodes.iter().enumerate() {
            self.parent.push(base + i);
            match n {
                Node::Full { ty, args } => {
                    self.ty.push(*ty);
                    let fs = self.h.features(*ty);
                    self.arcs.push(Some(
                        fs.iter().zip(args).map(|(&f, &a)| (f, base + a)).collect(),
                    ));
                }
                Node::General { ty } => {
                    self.ty.push(*ty);
                    self.arcs.push(None);
                }
                Node::Unknown => panic!("oracle input must be fully known"),
            }
        }
        g.roots.iter().map(|&r| base + r).collect()
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn general(&mut self, ty: TypeId) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        self.ty.push(ty);
        self.arcs.push(None);
        v
    }

    fn unify(&mut self, a: usize, b: usize) -> bool {
        let mut work = vec![(a, b)];
        while let Some((x, y)) = work.pop() {
            let (x, y) = (self.find(x), self.find(y));
            if x == y {
                continue;
            }
            let Some(t) = self.h.lub(self.ty[x], self.ty[y]) else {
                return false;
            };
            self.parent[y] = x;
            self.ty[x] = t;
            let ax = self.arcs[x].take();
            let ay = self.arcs[y].take();
            let merged = match (ax, ay) {
                (None, None) => None,
                (Some(m), None) | (None, Some(m)) => Some(m),
                (Some(mut m), Some(other)) => {
                    for (f, v) in other {
                        match m.get(&f) {
                            Some(&u) => work.push((u, v)),
                            None => {
                                m.insert(f, v);
                            }
                        }
                    }
                    Some(m)
                }
            };
            self.arcs[x] = merged.map(|mut m| {
                for &f in self.h.features(t) {
                    if let std::collections::btree_map::Entry::Vacant(slot) = m.entry(f) {
                        slot.insert(self.general(self.h.approp(t, f).unwrap()));
                    }
                }
                m
            });
        }
        true
    }

    fn extract(&mut self, roots: &[usize]) -> FsGraph {
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = Vec::new();
        let mut stack: Vec<usize> = roots.iter().rev().map(|&r| self.find(r)).collect();
        while let Some(v) = stack.pop() {
            let v = self.find(v);
            if index.contains_key(&v) {
                continue;
            }
            index.insert(v, order.len());
            order.push(v);
            if let Some(m) = &self.arcs[v] {
                stack.extend(m.values().rev().copied());
            }
        }
        let nodes = order
            .iter()
            .map(|&v| match self.arcs[v].clone() {
                None => Node::General { ty: self.ty[v] },
                Some(m) => Node::Full {
                    ty: self.ty[v],
                    args: m.values().map(|&a| index[&self.find(a)]).collect(),
                },
            })
            .collect();
        let roots = roots.iter().map(|&r| index[&self.find(r)]).collect();
        FsGraph { nodes, roots }
    }
}

/// Unifies the first roots of two graphs; `None` on type clash.
pub fn oracle_unify(h: &TypeHierarchy, a: &FsGraph, b: &FsGraph) -> Option<FsGraph> {
    let mut o = Oracle::new(h);
    let ra = o.add_graph(a)[0];
    let rb = o.add_graph(b)[0];
    if o.unify(ra, rb) {
        Some(o.extract(&[ra]))
    } else {
        None
    }
}

pub fn machine_unify(
    h: &TypeHierarchy,
    cfg: MachineConfig,
    query: &FsGraph,
    program: &FsGraph,
) -> Option<FsGraph> {
    let mut m = Machine::with_config(h, cfg).expect("configuration accepted");
    unify_terms(
        &mut m,
        &query.to_term().unwrap(),
        &program.to_term().unwrap(),
    )
    .expect("machine error")
}

pub fn same(h: &TypeHierarchy, a: &Option<FsGraph>, b: &Option<FsGraph>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => x.iso(y, h),
        _ => false,
    }
}

pub struct Case {
    pub hierarchy: TypeHierarchy,
    pub source: String,
    pub pairs: Vec<(FsGraph, FsGraph)>,
}

/// `hierarchies` random hierarchies with `per` structure pairs each.
pub fn corpus(seed: u64, hierarchies: usize, per: usize) -> Vec<Case> {
    let mut rng = rng(seed);
    (0..hierarchies)
        .map(|_| {
            let (source, h) = random_hierarchy(&mut rng);
            let pairs = (0..per)
                .map(|_| (random_graph(&mut rng, &h, 1), random_graph(&mut rng, &h, 1)))
                .collect();
            Case {
                hierarchy: h,
                source,
                pairs,
            }
        })
        .collect()
}

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::spec::{parse_type_spec, TypeSpec};
use crate::lexer::{Pos, SyntaxError};

/// Dense identifier of a type; `TypeId::BOT` is the most general type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u32);

impl TypeId {
    pub const BOT: TypeId = TypeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense identifier of a feature. Identifiers follow alphabetical order of
/// the feature names, so sorting by id sorts by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureId(pub u32);

impl FeatureId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Where a feature of a unification result comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureOrigin {
    /// Appropriate for the right operand only; 1-based position in its arcs.
    RightOnly(usize),
    /// Appropriate for the left operand only.
    LeftOnly,
    /// Appropriate for both; 1-based position in the right operand's arcs.
    Both(usize),
    /// Appropriate for neither operand; the value is the most general
    /// structure of the carried type.
    Introduced(TypeId),
}

/// Precomputed recipe for unifying a node of type `left` into a node of type
/// `right` resident on the heap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifyPlan {
    pub left: TypeId,
    pub right: TypeId,
    pub result: Option<TypeId>,
    pub steps: Vec<FeatureOrigin>,
}

impl UnifyPlan {
    /// True when the right operand already carries everything: same type,
    /// nothing to build.
    pub fn is_noop(&self) -> bool {
        self.result == Some(self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: type `{name}` is characterized more than once")]
    DuplicateCharacterization { name: String, pos: Pos },
    #[error("{pos}: unknown type `{name}`")]
    UnknownType { name: String, pos: Pos },
    #[error("{pos}: `bot` cannot be a subtype")]
    BotAsSubtype { pos: Pos },
    #[error("{pos}: feature `{feature}` is listed twice for `{ty}`")]
    DuplicateFeature {
        ty: String,
        feature: String,
        pos: Pos,
    },
    #[error("subsumption is not a partial order: cycle among {}", .types.join(", "))]
    NotPartialOrder { types: Vec<String> },
    #[error(
        "not bounded complete: `{left}` and `{right}` have minimal upper bounds {}",
        .bounds.join(", ")
    )]
    NotBoundedComplete {
        left: String,
        right: String,
        bounds: Vec<String>,
    },
    #[error("feature `{feature}` has no unique least introducer (introduced by {})", .types.join(", "))]
    FeatureIntroConflict { feature: String, types: Vec<String> },
    #[error(
        "non-monotone appropriateness: `{feature}` at `{ty}` has value `{found}`, \
         which is not subsumed by the inherited `{inherited}`"
    )]
    NonMonotone {
        feature: String,
        ty: String,
        inherited: String,
        found: String,
    },
    #[error(
        "unsupported refinement: `{feature}` at `{ty}` narrows inherited `{inherited}` to `{found}`; \
         appropriateness values must be fixed by the introducer"
    )]
    UnsupportedRefinement {
        feature: String,
        ty: String,
        inherited: String,
        found: String,
    },
}

/// A validated type hierarchy with all derived tables.
///
/// Immutable once built; every table is indexed by dense ids.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    names: Vec<String>,
    by_name: HashMap<String, TypeId>,
    subtypes: Vec<Vec<TypeId>>,
    // leq[a * n + b] <=> a subsumes b (a ⊑ b)
    leq: Vec<bool>,
    lub: Vec<Option<TypeId>>,
    feature_names: Vec<String>,
    feature_by_name: HashMap<String, FeatureId>,
    introducer: Vec<TypeId>,
    value: Vec<TypeId>,
    features: Vec<Vec<FeatureId>>,
    plans: Vec<UnifyPlan>,
    depth: usize,
    approp_loop: bool,
}

impl TypeHierarchy {
    /// Parses and validates a type specification in one go.
    pub fn from_source(text: &str) -> Result<TypeHierarchy, TypeError> {
        validate(&parse_type_spec(text)?)
    }

    pub fn type_count(&self) -> usize {
        self.names.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.names.len() as u32).map(TypeId)
    }

    pub fn bot(&self) -> TypeId {
        TypeId::BOT
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.names[t.index()]
    }

    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.feature_by_name.get(name).copied()
    }

    pub fn feature_name(&self, f: FeatureId) -> &str {
        &self.feature_names[f.index()]
    }

    /// Immediate subtypes as declared (plus implicit attachment under `bot`).
    pub fn subtypes(&self, t: TypeId) -> &[TypeId] {
        &self.subtypes[t.index()]
    }

    /// `a ⊑ b`: `a` is at least as general as `b`.
    pub fn subsumes(&self, a: TypeId, b: TypeId) -> bool {
        self.leq[a.index() * self.names.len() + b.index()]
    }

    /// Least upper bound; `None` stands for the contradictory type.
    pub fn lub(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        self.lub[a.index() * self.names.len() + b.index()]
    }

    pub fn plan(&self, left: TypeId, right: TypeId) -> &UnifyPlan {
        &self.plans[left.index() * self.names.len() + right.index()]
    }

    /// Appropriate features of `t`, in alphabetical order.
    pub fn features(&self, t: TypeId) -> &[FeatureId] {
        &self.features[t.index()]
    }

    pub fn arity(&self, t: TypeId) -> usize {
        self.features[t.index()].len()
    }

    pub fn approp(&self, t: TypeId, f: FeatureId) -> Option<TypeId> {
        if self.subsumes(self.introducer[f.index()], t) {
            Some(self.value[f.index()])
        } else {
            None
        }
    }

    /// Value type of the `i`-th (0-based) feature of `t`.
    pub fn approp_at(&self, t: TypeId, i: usize) -> TypeId {
        self.value[self.features[t.index()][i].index()]
    }

    pub fn introducer(&self, f: FeatureId) -> TypeId {
        self.introducer[f.index()]
    }

    /// 0-based position of `f` among the features of `t`.
    pub fn feature_position(&self, t: TypeId, f: FeatureId) -> Option<usize> {
        self.features[t.index()].binary_search(&f).ok()
    }

    /// Length of the longest strictly increasing chain of types.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// True if building the most general structure of some type would
    /// recurse forever.
    pub fn has_appropriateness_loop(&self) -> bool {
        self.approp_loop
    }

    /// Number of consistent ordered pairs in the LUB table.
    pub fn consistent_pairs(&self) -> usize {
        self.lub.iter().filter(|l| l.is_some()).count()
    }
}

/// Validates a specification and materializes every derived table.
pub fn validate(spec: &TypeSpec) -> Result<TypeHierarchy, TypeError> {
    let mut names: Vec<String> = vec!["bot".to_string()];
    let mut by_name: HashMap<String, TypeId> = HashMap::new();
    by_name.insert("bot".to_string(), TypeId::BOT);

    let mut intern = |name: &str, names: &mut Vec<String>| -> TypeId {
        if let Some(&id) = by_name.get(name) {
            return id;
        }
        let id = TypeId(names.len() as u32);
        names.push(name.to_string());
        by_name.insert(name.to_string(), id);
        id
    };

    let mut characterized: HashMap<&str, Pos> = HashMap::new();
    for st in &spec.statements {
        if characterized.insert(&st.name, st.pos).is_some() {
            return Err(TypeError::DuplicateCharacterization {
                name: st.name.clone(),
                pos: st.pos,
            });
        }
        intern(&st.name, &mut names);
        for sub in &st.subtypes {
            if sub == "bot" {
                return Err(TypeError::BotAsSubtype { pos: st.pos });
            }
            intern(sub, &mut names);
        }
    }
    let by_name = {
        let mut m = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            m.insert(n.clone(), TypeId(i as u32));
        }
        m
    };
    let n = names.len();

    // immediate subtype edges; parentless types hang under bot
    let mut subtypes: Vec<Vec<TypeId>> = vec![Vec::new(); n];
    let mut has_parent = vec![false; n];
    for st in &spec.statements {
        let t = by_name[&st.name];
        for sub in &st.subtypes {
            let s = by_name[sub];
            if s != t && !subtypes[t.index()].contains(&s) {
                subtypes[t.index()].push(s);
            }
            if s != t {
                has_parent[s.index()] = true;
            }
        }
    }
    for (i, _) in has_parent.iter().enumerate().skip(1).filter(|(_, p)| !**p) {
        if !subtypes[0].contains(&TypeId(i as u32)) {
            subtypes[0].push(TypeId(i as u32));
        }
    }

    let leq = closure(&subtypes);
    for a in 0..n {
        for b in (a + 1)..n {
            if leq[a * n + b] && leq[b * n + a] {
                let cycle: Vec<String> = (0..n)
                    .filter(|&c| leq[a * n + c] && leq[c * n + a])
                    .map(|c| names[c].clone())
                    .collect();
                return Err(TypeError::NotPartialOrder { types: cycle });
            }
        }
    }

    let mut lub = vec![None; n * n];
    for a in 0..n {
        for b in a..n {
            let uppers: Vec<usize> = (0..n)
                .filter(|&u| leq[a * n + u] && leq[b * n + u])
                .collect();
            let minimal: Vec<usize> = uppers
                .iter()
                .copied()
                .filter(|&u| !uppers.iter().any(|&v| v != u && leq[v * n + u]))
                .collect();
            let l = match minimal.len() {
                0 => None,
                1 => Some(TypeId(minimal[0] as u32)),
                _ => {
                    return Err(TypeError::NotBoundedComplete {
                        left: names[a].clone(),
                        right: names[b].clone(),
                        bounds: minimal.iter().map(|&u| names[u].clone()).collect(),
                    })
                }
            };
            lub[a * n + b] = l;
            lub[b * n + a] = l;
        }
    }

    // features: alphabetical ids
    let mut fnames: Vec<String> = spec
        .statements
        .iter()
        .flat_map(|st| st.intro.iter().map(|(f, _)| f.clone()))
        .collect();
    fnames.sort();
    fnames.dedup();
    let feature_by_name: HashMap<String, FeatureId> = fnames
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), FeatureId(i as u32)))
        .collect();

    // declarations[f] = (type, value, pos)
    let mut decls: Vec<Vec<(TypeId, TypeId)>> = vec![Vec::new(); fnames.len()];
    for st in &spec.statements {
        let t = by_name[&st.name];
        let mut local: Vec<&str> = Vec::new();
        for (f, v) in &st.intro {
            if local.contains(&f.as_str()) {
                return Err(TypeError::DuplicateFeature {
                    ty: st.name.clone(),
                    feature: f.clone(),
                    pos: st.pos,
                });
            }
            local.push(f);
            let value = *by_name.get(v).ok_or_else(|| TypeError::UnknownType {
                name: v.clone(),
                pos: st.pos,
            })?;
            decls[feature_by_name[f].index()].push((t, value));
        }
    }

    let mut introducer = Vec::with_capacity(fnames.len());
    let mut value = Vec::with_capacity(fnames.len());
    for (fi, ds) in decls.iter().enumerate() {
        let least = ds
            .iter()
            .find(|(t, _)| ds.iter().all(|(u, _)| leq[t.index() * n + u.index()]));
        let &(intro, val) = match least {
            Some(d) => d,
            None => {
                let mut types: Vec<String> =
                    ds.iter().map(|(t, _)| names[t.index()].clone()).collect();
                types.dedup();
                return Err(TypeError::FeatureIntroConflict {
                    feature: fnames[fi].clone(),
                    types,
                });
            }
        };
        for &(t, v) in ds {
            if v == val {
                continue;
            }
            let err = if leq[val.index() * n + v.index()] {
                TypeError::UnsupportedRefinement {
                    feature: fnames[fi].clone(),
                    ty: names[t.index()].clone(),
                    inherited: names[val.index()].clone(),
                    found: names[v.index()].clone(),
                }
            } else {
                TypeError::NonMonotone {
                    feature: fnames[fi].clone(),
                    ty: names[t.index()].clone(),
                    inherited: names[val.index()].clone(),
                    found: names[v.index()].clone(),
                }
            };
            return Err(err);
        }
        introducer.push(intro);
        value.push(val);
    }

    let features: Vec<Vec<FeatureId>> = (0..n)
        .map(|t| {
            (0..fnames.len())
                .filter(|&f| leq[introducer[f].index() * n + t])
                .map(|f| FeatureId(f as u32))
                .collect()
        })
        .collect();

    let depth = longest_chain(&subtypes);
    let approp_loop = has_loop(n, |t| {
        features[t]
            .iter()
            .map(|f| value[f.index()].index())
            .collect()
    });

    let mut h = TypeHierarchy {
        names,
        by_name,
        subtypes,
        leq,
        lub,
        feature_names: fnames,
        feature_by_name,
        introducer,
        value,
        features,
        plans: Vec::new(),
        depth,
        approp_loop,
    };
    h.plans = (0..n * n)
        .map(|i| build_plan(&h, TypeId((i / n) as u32), TypeId((i % n) as u32)))
        .collect();
    Ok(h)
}

fn build_plan(h: &TypeHierarchy, left: TypeId, right: TypeId) -> UnifyPlan {
    let result = h.lub(left, right);
    let steps = match result {
        None => Vec::new(),
        Some(u) => h
            .features(u)
            .iter()
            .map(|&f| {
                let in_left = h.feature_position(left, f).is_some();
                match (in_left, h.feature_position(right, f)) {
                    (false, Some(p)) => FeatureOrigin::RightOnly(p + 1),
                    (true, Some(p)) => FeatureOrigin::Both(p + 1),
                    (true, None) => FeatureOrigin::LeftOnly,
                    (false, None) => FeatureOrigin::Introduced(h.value[f.index()]),
                }
            })
            .collect(),
    };
    UnifyPlan {
        left,
        right,
        result,
        steps,
    }
}

fn closure(subtypes: &[Vec<TypeId>]) -> Vec<bool> {
    let n = subtypes.len();
    let mut leq = vec![false; n * n];
    for start in 0..n {
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            if leq[start * n + t] {
                continue;
            }
            leq[start * n + t] = true;
            stack.extend(subtypes[t].iter().map(|s| s.index()));
        }
    }
    leq
}

fn longest_chain(subtypes: &[Vec<TypeId>]) -> usize {
    fn go(t: usize, subtypes: &[Vec<TypeId>], memo: &mut [Option<usize>]) -> usize {
        if let Some(d) = memo[t] {
            return d;
        }
        let d = subtypes[t]
            .iter()
            .map(|s| 1 + go(s.index(), subtypes, memo))
            .max()
            .unwrap_or(0);
        memo[t] = Some(d);
        d
    }
    let mut memo = vec![None; subtypes.len()];
    go(0, subtypes, &mut memo)
}

fn has_loop(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(root, succ(root))];
        state[root] = 1;
        while let Some((t, next)) = stack.last_mut() {
            match next.pop() {
                Some(s) if state[s] == 1 => return true,
                Some(s) if state[s] == 0 => {
                    state[s] = 1;
                    let ss = succ(s);
                    stack.push((s, ss));
                }
                Some(_) => {}
                None => {
                    state[*t] = 2;
                    stack.pop();
                }
            }
        }
    }
    false
}

impl fmt::Display for TypeHierarchy {
    /// Prints the hierarchy back in statement form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.types() {
            let subs: Vec<&str> = self
                .subtypes(t)
                .iter()
                .map(|&s| self.type_name(s))
                .collect();
            write!(f, "{} sub [{}]", self.type_name(t), subs.join(","))?;
            let intro: Vec<String> = (0..self.feature_count())
                .filter(|&i| self.introducer[i] == t)
                .map(|i| {
                    format!(
                        "{}:{}",
                        self.feature_names[i],
                        self.type_name(self.value[i])
                    )
                })
                .collect();
            if !intro.is_empty() {
                write!(f, " intro [{}]", intro.join(","))?;
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

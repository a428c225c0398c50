//! Type specifications and the validated type hierarchy.
//!
//! A specification is a list of `t sub [t1,...,tn] intro [f1:r1,...].`
//! statements. Validation computes the subsumption closure, checks bounded
//! completeness and the appropriateness conditions, fixes a global
//! alphabetical feature order, and precomputes a [`UnifyPlan`] for every
//! ordered pair of types.
//!
//! Types named only in a `sub` list are implicit leaves with no features;
//! types without a declared supertype are placed directly under `bot`.

mod hierarchy;
pub(crate) mod spec;

pub use hierarchy::{
    validate, FeatureId, FeatureOrigin, TypeError, TypeHierarchy, TypeId, UnifyPlan,
};
pub use spec::{parse_type_spec, Statement, TypeSpec};

#[cfg(test)]
pub(crate) const EXAMPLE: &str = include_str!("../../fixtures/example.types");

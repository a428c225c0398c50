//! Inputs shared by the benchmarks under `benches/`.

use tfsam::{Grammar, TypeHierarchy};

pub const EXAMPLE_TYPES: &str = include_str!("../../core/fixtures/example.types");
pub const TOY_GRAMMAR: &str = include_str!("../../core/fixtures/toy.grammar");

pub fn example_hierarchy() -> TypeHierarchy {
    TypeHierarchy::from_source(EXAMPLE_TYPES).expect("example hierarchy is valid")
}

/// A grammar with a left-recursive binary rule over `a` and `d` structures;
/// an input of `n` words has Catalan-many bracketings before deduplication.
pub fn chain_grammar() -> Grammar {
    Grammar::parse(
        "bot sub [g,d].
         g sub [a,b] intro [f3:d]. a sub [c] intro [f1:bot].
         c sub [] intro [f4:bot]. b sub [c,e] intro [f2:bot].
         d sub [d1,d2]. d1 sub []. d2 sub [].
         rule join: a(bot,#1 d), a(bot,#1) => a(d2,#1).
         lex x => a(d1,d).
         start => a(bot,d).",
    )
    .expect("chain grammar is valid")
}

/// A hierarchy with `n` leaves under a chain of `depth` feature-introducing
/// types, for timing validation and plan tables.
pub fn wide_hierarchy_source(depth: usize, n: usize) -> String {
    let mut s = String::from("bot sub [k0, v].\nv sub [].\n");
    for i in 0..depth {
        let leaves: Vec<String> = (0..n).map(|j| format!("l{i}_{j}")).collect();
        let next = if i + 1 < depth {
            format!("k{},", i + 1)
        } else {
            String::new()
        };
        s += &format!("k{i} sub [{next}{}] intro [f{i}:v].\n", leaves.join(","));
        for l in leaves {
            s += &format!("{l} sub [].\n");
        }
    }
    s
}

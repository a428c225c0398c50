mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use tfsam::compiler::{assemble, compile_program, compile_query, disassemble, CodeArea};
use tfsam::machine::Halt;
use tfsam::parser::{LexEntry, Rule};
use tfsam::terms::{flatten, Reg};
use tfsam::{parse_term, Grammar, Machine, MachineConfig, ParseError, Parser, ParserConfig, Pos};

const LAZY: MachineConfig = MachineConfig {
    lazy: true,
    path_compression: true,
};
const EAGER: MachineConfig = MachineConfig {
    lazy: false,
    path_compression: true,
};

fn setup(seed: u64) -> (tfsam::TypeHierarchy, tfsam::FsGraph, tfsam::FsGraph) {
    let mut r = rng(seed);
    let (_, h) = random_hierarchy(&mut r);
    let a = random_graph(&mut r, &h, 1);
    let b = random_graph(&mut r, &h, 1);
    (h, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn machine_agrees_with_oracle(seed in any::<u64>()) {
        let (h, a, b) = setup(seed);
        let got = machine_unify(&h, LAZY, &a, &b);
        let want = oracle_unify(&h, &a, &b);
        prop_assert!(same(&h, &got, &want), "{:?} vs {:?}", got, want);
    }

    #[test]
    fn unification_commutes(seed in any::<u64>()) {
        let (h, a, b) = setup(seed);
        prop_assert!(same(&h, &machine_unify(&h, LAZY, &a, &b), &machine_unify(&h, LAZY, &b, &a)));
    }

    #[test]
    fn unification_is_idempotent(seed in any::<u64>()) {
        let (h, a, _) = setup(seed);
        let r = machine_unify(&h, LAZY, &a, &a);
        prop_assert!(same(&h, &r, &Some(a)));
    }

    #[test]
    fn lazy_and_eager_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = loop_free_hierarchy(&mut r);
        let a = random_graph(&mut r, &h, 1);
        let b = random_graph(&mut r, &h, 1);
        prop_assert!(same(&h, &machine_unify(&h, LAZY, &a, &b), &machine_unify(&h, EAGER, &a, &b)));
    }

    #[test]
    fn undo_restores_heap(seed in any::<u64>()) {
        let (h, a, b) = setup(seed);
        let mut m = Machine::new(&h);
        m.exec(&compile_query(&flatten(&a.to_term().unwrap())), 0).unwrap();
        let before = m.heap().to_vec();
        let mark = m.checkpoint();
        let halt = m.exec(&compile_program(&flatten(&b.to_term().unwrap())), 0).unwrap();
        prop_assert!(matches!(halt, Halt::End | Halt::Failed));
        m.undo(mark).unwrap();
        prop_assert_eq!(m.heap(), &before[..]);
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let (h, a, _) = setup(seed);
        let t = a.to_term().unwrap();
        let text = t.display(&h).to_string();
        let back = parse_term(&text, &h).unwrap();
        prop_assert_eq!(&back, &t, "{}", text);
    }

    #[test]
    fn flattening_preserves_structure(seed in any::<u64>()) {
        let (h, a, _) = setup(seed);
        let e = flatten(&a.to_term().unwrap());
        prop_assert!(e.to_graph().iso(&a, &h));
    }

    #[test]
    fn query_code_rebuilds_input(seed in any::<u64>()) {
        let (h, a, _) = setup(seed);
        let code = compile_query(&flatten(&a.to_term().unwrap()));
        let mut m = Machine::new(&h);
        m.exec(&code, 0).unwrap();
        prop_assert!(m.extract_reg(Reg(1)).unwrap().iso(&a, &h));
        // arcs may come in any order once every node exists
        let mut shuffled = code.clone();
        let mut r = rng(seed ^ 0x5eed);
        let arcs_from = shuffled.iter().position(|i| matches!(i, tfsam::Instr::PutArc { .. }));
        if let Some(k) = arcs_from {
            let tail = &mut shuffled[k..];
            for i in (1..tail.len()).rev() {
                tail.swap(i, r.gen_range(0..=i));
            }
        }
        let mut m = Machine::new(&h);
        m.exec_query_streams(&shuffled).unwrap();
        prop_assert!(m.extract_reg(Reg(1)).unwrap().iso(&a, &h));
    }

    #[test]
    fn listings_reassemble(seed in any::<u64>()) {
        let (h, a, _) = setup(seed);
        let e = flatten(&a.to_term().unwrap());
        let mut area = CodeArea::default();
        area.push("query", &compile_query(&e));
        area.push("program", &compile_program(&e));
        let text = disassemble(&area, &h);
        prop_assert_eq!(assemble(&text, &h).unwrap(), area);
    }

    #[test]
    fn ref_chains_end_in_nodes(seed in any::<u64>()) {
        let (h, a, b) = setup(seed);
        let cfg = MachineConfig { lazy: true, path_compression: false };
        let mut m = Machine::with_config(&h, cfg).unwrap();
        m.exec(&compile_query(&flatten(&a.to_term().unwrap())), 0).unwrap();
        let halt = m.exec(&compile_program(&flatten(&b.to_term().unwrap())), 0).unwrap();
        // merged nodes chain like bound variables; a chain never revisits a cell
        let n = m.heap().len();
        for c in 0..n {
            prop_assert!(m.chain_length(c) < n);
            let end = m.deref(c).unwrap();
            // unfilled skeleton cells only survive a failure
            if halt == Halt::End {
                prop_assert!(!matches!(m.heap()[end], tfsam::Cell::Ref(_)));
            }
        }
    }

    #[test]
    fn parser_undo_is_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (_, h) = random_hierarchy(&mut r);
        let pos = Pos::default();
        let rules = (0..r.gen_range(1..=3))
            .map(|k| {
                let roots = r.gen_range(2..=3);
                Rule { name: format!("r{k}"), mrs: random_mrs(&mut r, &h, roots), pos }
            })
            .collect();
        let lexicon = (0..4)
            .map(|k| LexEntry { word: format!("w{}", k % 3), term: random_term(&mut r, &h), pos })
            .collect();
        let start = r.gen_bool(0.5).then(|| random_term(&mut r, &h));
        let g = Grammar { hierarchy: h, rules, lexicon, start };
        let cfg = ParserConfig { max_items: 400, max_steps: 4000, verify_undo: true, ..ParserConfig::default() };
        let n = r.gen_range(1..=3);
        let words: Vec<String> = (0..n).map(|_| format!("w{}", r.gen_range(0..3))).collect();
        let words: Vec<&str> = words.iter().map(String::as_str).collect();
        match Parser::new(&g, cfg).parse(&words) {
            Ok(_) | Err(ParseError::LimitExceeded { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

#[test]
fn specialisation_chain_is_bounded_by_depth() {
    let h = tfsam::TypeHierarchy::from_source(
        "bot sub [g,d]. g sub [a,b] intro [f3:d]. a sub [c] intro [f1:bot].
         c sub [] intro [f4:bot]. b sub [c,e] intro [f2:bot]. d sub [d1,d2].
         d1 sub []. d2 sub [].",
    )
    .unwrap();
    let cfg = MachineConfig {
        lazy: true,
        path_compression: false,
    };
    let mut m = Machine::with_config(&h, cfg).unwrap();
    m.exec(
        &compile_query(&flatten(&parse_term("g(d)", &h).unwrap())),
        0,
    )
    .unwrap();
    for step in ["a", "c"] {
        let p = compile_program(&flatten(&parse_term(step, &h).unwrap()));
        assert_eq!(m.exec(&p, 0).unwrap(), Halt::End);
    }
    let longest = (0..m.heap().len())
        .map(|c| m.chain_length(c))
        .max()
        .unwrap();
    assert!(
        longest <= h.depth(),
        "chain {longest} > depth {}",
        h.depth()
    );
    assert_eq!(
        m.extract(&[0])
            .unwrap()
            .to_term()
            .unwrap()
            .display(&h)
            .to_string(),
        "c(bot,bot,d,bot)"
    );
}

//! Forward chaining, the query reading and backward proof search against a
//! naive fixpoint over random programs.

mod common;

use std::collections::BTreeSet;

use logiclm::ir::Atom;
use logiclm::lp::{backward_prove, forward_chain, lp_query, LpLimits};
use logiclm::syntax::{parse_lp, print_lp};

use common::lp::{engine_query, naive_fixpoint, naive_query, random_program, shuffled};

fn engine_facts(p: &logiclm::syntax::lp::LpProgram) -> BTreeSet<Atom> {
    forward_chain(p, &LpLimits::default())
        .unwrap()
        .iter()
        .cloned()
        .collect()
}

#[test]
fn fixpoint_matches_naive_oracle() {
    for seed in 0..150 {
        let p = random_program(&mut common::rng(seed), 8);
        assert_eq!(engine_facts(&p), naive_fixpoint(&p), "seed {seed}\n{}", print_lp(&p));
        assert_eq!(engine_query(&p), naive_query(&p), "seed {seed}\n{}", print_lp(&p));
    }
}

#[test]
fn backward_search_agrees_with_fixpoint() {
    for seed in 1000..1300 {
        let p = random_program(&mut common::rng(seed), 8);
        let derived = naive_fixpoint(&p);
        let mut goals: Vec<Atom> = derived.iter().take(5).cloned().collect();
        goals.push(p.query.clone());
        for g in goals {
            let proof = backward_prove(&p, &g, &LpLimits::default()).unwrap();
            assert_eq!(
                proof.is_some(),
                derived.contains(&g),
                "seed {seed} goal {g}\n{}",
                print_lp(&p)
            );
        }
    }
}

#[test]
fn verdict_is_invariant_under_reordering() {
    for seed in 0..10 {
        let p = random_program(&mut common::rng(seed), 8);
        let mut rng = common::rng(seed + 7);
        let facts = engine_facts(&p);
        let verdict = engine_query(&p);
        for _ in 0..20 {
            let q = shuffled(&p, &mut rng);
            assert_eq!(engine_facts(&q), facts);
            assert_eq!(engine_query(&q), verdict);
        }
    }
}

#[test]
fn generated_programs_parse_back() {
    for seed in 0..50 {
        let p = random_program(&mut common::rng(seed), 8);
        assert_eq!(parse_lp(&print_lp(&p)).unwrap().value, p);
    }
}

#[test]
fn derivation_chain_is_limited() {
    // A successor chain of length 50 needs 50 rounds.
    let mut text = String::from("Predicates:\nNext($x, $y)\nReach($x, bool)\nFacts:\nReach(n0, True)\n");
    for i in 0..50 {
        text.push_str(&format!("Next(n{i}, n{})\n", i + 1));
    }
    text.push_str("Rules:\nReach($x, True) && Next($x, $y) >>> Reach($y, True)\nQuery:\nReach(n50, True)\n");
    let p = parse_lp(&text).unwrap().value;
    let full = lp_query(&p, &LpLimits::default()).unwrap();
    assert_eq!(full.value, logiclm::TruthValue::Proved);
    let tight = LpLimits {
        max_iterations: 10,
        ..LpLimits::default()
    };
    let cut = lp_query(&p, &tight).unwrap();
    assert_eq!(cut.value, logiclm::TruthValue::Unknown);
    assert_eq!(cut.warnings.len(), 1);
}

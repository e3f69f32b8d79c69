//! Random program generators and brute-force oracles shared by the
//! integration tests and the acceptance run. The oracles evaluate the
//! languages' semantics directly and share no code with the engines.

#![allow(dead_code)]

pub mod cli;
pub mod csp;
pub mod faults;
pub mod fol;
pub mod lp;
pub mod syntax;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logiclm::pipeline::{load_dataset, Problem};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn gold_problems() -> Vec<Problem> {
    load_dataset(&fixture_path("gold.jsonl")).expect("gold dataset loads")
}

/// A gloss for `:::` annotations: printable text with no line break.
pub fn random_gloss(rng: &mut TestRng) -> Option<String> {
    const WORDS: [&str; 12] = [
        "The",
        "cat",
        "is",
        "not",
        "every",
        "ride's",
        "\"quoted\"",
        "a:b",
        "(maybe)",
        "x >>> y",
        "$x",
        "100%",
    ];
    if rng.random_bool(0.5) {
        return None;
    }
    let n = rng.random_range(1..=6);
    let words: Vec<&str> = (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
    Some(words.join(" "))
}

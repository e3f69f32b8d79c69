//! Round-trip checks and byte-level fuzzing for the three parsers.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::seq::IndexedRandom;
use rand::Rng;

use logiclm::pipeline::{TaskKind, TemplateSet};
use logiclm::syntax::{parse_csp, parse_fol, parse_lp, print_csp, print_fol, print_lp, ParseErrors};

use super::TestRng;

pub const KINDS: [TaskKind; 3] = [TaskKind::Deductive, TaskKind::Fol, TaskKind::Csp];

/// Parses `text`; on success, checks that printing and re-parsing gives the
/// same value and that printing is a fixpoint. `Ok(false)` means the text
/// was rejected with well-formed errors.
pub fn round_trip(kind: TaskKind, text: &str) -> Result<bool, String> {
    fn check<T: PartialEq + std::fmt::Debug>(
        text: &str,
        parse: impl Fn(&str) -> Result<logiclm::syntax::Parsed<T>, ParseErrors>,
        print: impl Fn(&T) -> String,
    ) -> Result<bool, String> {
        let value = match parse(text) {
            Ok(p) => p.value,
            Err(errors) => {
                let lines = text.split('\n').count();
                for e in &errors.0 {
                    if e.span.line == 0 || e.span.column == 0 || e.span.line > lines + 1 {
                        return Err(format!("bad span {:?} in {e}", e.span));
                    }
                    if e.to_string().is_empty() {
                        return Err("empty error message".into());
                    }
                }
                return Ok(false);
            }
        };
        let printed = print(&value);
        let again = parse(&printed).map_err(|e| format!("printed text does not parse: {e}\n{printed}"))?;
        if again.value != value {
            return Err(format!(
                "value changed after printing:\n{printed}\n{:?}\n{:?}",
                value, again.value
            ));
        }
        let twice = print(&again.value);
        if twice != printed {
            return Err(format!("printing is not stable:\n{printed}\n---\n{twice}"));
        }
        Ok(true)
    }
    match kind {
        TaskKind::Deductive => check(text, parse_lp, print_lp),
        TaskKind::Fol => check(text, parse_fol, print_fol),
        TaskKind::Csp => check(text, parse_csp, print_csp),
    }
}

fn first_header(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Deductive => "Predicates:",
        TaskKind::Fol => "Facts:",
        TaskKind::Csp => "Domain:",
    }
}

fn template_kind(name: &str) -> TaskKind {
    match name {
        "prontoqa" | "proofwriter" | "refine_deductive" => TaskKind::Deductive,
        "folio" | "refine_fol" => TaskKind::Fol,
        _ => TaskKind::Csp,
    }
}

/// Every formulation shipped with the crate: gold formulations, template
/// demonstrations, and the broken and corrected programs of the correction
/// demonstrations.
pub fn fixture_programs() -> Vec<(String, TaskKind, String)> {
    let mut out = Vec::new();
    for p in super::gold_problems() {
        out.push((p.id.clone(), p.task_kind, p.formulation.clone().unwrap()));
    }
    let set = TemplateSet::shipped();
    for name in set.names() {
        let kind = template_kind(name);
        for (i, demo) in set.get(name).unwrap().examples.iter().enumerate() {
            let id = format!("{name}#{i}");
            if name.starts_with("refine_") {
                let program = demo
                    .split("\nProgram:\n")
                    .nth(1)
                    .unwrap()
                    .split("\n\nError:\n")
                    .next()
                    .unwrap();
                let corrected = demo.split("\nCorrected program:\n").nth(1).unwrap();
                out.push((format!("{id}/wrong"), kind, program.to_string()));
                out.push((format!("{id}/fixed"), kind, corrected.to_string()));
            } else {
                let header = format!("\n{}\n", first_header(kind));
                let at = demo.find(&header).unwrap() + 1;
                out.push((id, kind, demo[at..].to_string()));
            }
        }
    }
    out
}

const VOCABULARY: [&str; 48] = [
    "Predicates:",
    "Facts:",
    "Rules:",
    "Query:",
    "Domain:",
    "Variables:",
    "Constraints:",
    "\n",
    "\n",
    "\n",
    " ",
    " ",
    "(",
    ")",
    "[",
    "]",
    ",",
    "$x",
    "$y",
    "True",
    "False",
    ">>>",
    "&&",
    ":::",
    "'",
    "\"",
    "Atom",
    "Not",
    "And",
    "Forall",
    "Exists",
    "Implies",
    "OrList",
    "AllDifferentConstraint",
    "[IN]",
    "==",
    "!=",
    "<=",
    "+",
    "-",
    "1",
    "42",
    "-7",
    "A)",
    "Cat",
    "tom",
    "\u{e9}",
    "99999999999999999999",
];

/// A fuzz input: raw bytes, a token soup, or a corrupted fixture.
pub fn fuzz_input(rng: &mut TestRng, fixtures: &[String]) -> String {
    match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(0..200);
            let bytes: Vec<u8> = (0..n).map(|_| rng.random()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        }
        1 => (0..rng.random_range(0..80))
            .map(|_| *VOCABULARY.choose(rng).unwrap())
            .collect(),
        _ => {
            let mut chars: Vec<char> = fixtures.choose(rng).unwrap().chars().collect();
            for _ in 0..rng.random_range(1..6) {
                let at = rng.random_range(0..=chars.len());
                match rng.random_range(0..3) {
                    0 if at < chars.len() => {
                        chars.remove(at);
                    }
                    1 => chars.insert(at, *b"()[],:$'\"\n>&=!-+0Az ".choose(rng).unwrap() as char),
                    _ => {
                        let end = (at + rng.random_range(0..30)).min(chars.len());
                        chars.drain(at..end);
                    }
                }
            }
            chars.into_iter().collect()
        }
    }
}

#[derive(Debug, Default)]
pub struct FuzzStats {
    pub runs: usize,
    pub accepted: usize,
    pub crashes: Vec<String>,
    pub violations: Vec<String>,
}

/// Feeds `n` fuzz inputs to the parser of `kind`, catching panics.
pub fn fuzz(kind: TaskKind, n: usize, seed: u64) -> FuzzStats {
    let fixtures: Vec<String> = fixture_programs()
        .into_iter()
        .filter(|(_, k, _)| *k == kind)
        .map(|(_, _, t)| t)
        .collect();
    let mut rng = super::rng(seed);
    let mut stats = FuzzStats::default();
    for _ in 0..n {
        let input = fuzz_input(&mut rng, &fixtures);
        stats.runs += 1;
        match catch_unwind(AssertUnwindSafe(|| round_trip(kind, &input))) {
            Ok(Ok(accepted)) => stats.accepted += accepted as usize,
            Ok(Err(v)) => stats.violations.push(format!("{input:?}: {v}")),
            Err(_) => stats.crashes.push(format!("{input:?}")),
        }
    }
    stats
}

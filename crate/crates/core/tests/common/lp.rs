//! Logic programs: a generator and a naive fixpoint oracle.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use logiclm::ir::{Atom, Term, TruthValue};
use logiclm::lp::{lp_query, LpError, LpLimits};
use logiclm::syntax::lp::{LpFact, LpProgram, LpRule, PredicateDecl};

use super::{random_gloss, TestRng};

const PREDICATES: [&str; 5] = ["Big", "Red", "Likes", "Sees", "Kind"];
const CONSTANTS: [&str; 4] = ["Anne", "bob", "Dave_2", "Charlie"];
const VARIABLES: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Verdict(TruthValue),
    Inconsistent,
}

struct Signature {
    /// Name and number of entity arguments; every atom ends with a boolean.
    preds: Vec<(&'static str, usize)>,
    constants: Vec<&'static str>,
}

fn signature(rng: &mut TestRng) -> Signature {
    let n = rng.random_range(2..=PREDICATES.len());
    let mut names = PREDICATES.to_vec();
    names.shuffle(rng);
    let preds = names[..n]
        .iter()
        .map(|&p| (p, if rng.random_bool(0.3) { 2 } else { 1 }))
        .collect();
    let k = rng.random_range(1..=3);
    let mut constants = CONSTANTS.to_vec();
    constants.shuffle(rng);
    Signature {
        preds,
        constants: constants[..k].to_vec(),
    }
}

fn polarity(rng: &mut TestRng) -> Term {
    Term::Bool(rng.random_bool(0.75))
}

fn ground_atom(rng: &mut TestRng, sig: &Signature) -> Atom {
    let (p, n) = sig.preds[rng.random_range(0..sig.preds.len())];
    let mut args: Vec<Term> = (0..n)
        .map(|_| Term::constant(sig.constants[rng.random_range(0..sig.constants.len())]))
        .collect();
    args.push(polarity(rng));
    Atom::new(p, args)
}

fn pattern_atom(rng: &mut TestRng, sig: &Signature, vars: &[&str]) -> Atom {
    let (p, n) = sig.preds[rng.random_range(0..sig.preds.len())];
    let mut args: Vec<Term> = (0..n)
        .map(|_| {
            if vars.is_empty() || rng.random_bool(0.15) {
                Term::constant(sig.constants[rng.random_range(0..sig.constants.len())])
            } else {
                Term::var(vars[rng.random_range(0..vars.len())])
            }
        })
        .collect();
    args.push(polarity(rng));
    Atom::new(p, args)
}

fn random_rule(rng: &mut TestRng, sig: &Signature) -> LpRule {
    let nvars = rng.random_range(1..=VARIABLES.len());
    let vars = &VARIABLES[..nvars];
    let body: Vec<Atom> = (0..rng.random_range(1..=3))
        .map(|_| pattern_atom(rng, sig, vars))
        .collect();
    let bound: Vec<&str> = VARIABLES
        .iter()
        .copied()
        .filter(|v| body.iter().any(|a| a.variables().contains(*v)))
        .collect();
    let heads = if rng.random_bool(0.2) { 2 } else { 1 };
    let head = (0..heads).map(|_| pattern_atom(rng, sig, &bound)).collect();
    LpRule {
        body,
        head,
        gloss: random_gloss(rng),
    }
}

/// A random well-formed program with at most `max_rules` rules.
pub fn random_program(rng: &mut TestRng, max_rules: usize) -> LpProgram {
    let sig = signature(rng);
    let predicates = sig
        .preds
        .iter()
        .map(|&(p, n)| {
            let mut params: Vec<Term> = VARIABLES[..n].iter().map(|v| Term::var(*v)).collect();
            params.push(Term::constant("bool"));
            PredicateDecl {
                name: p.to_string(),
                params,
                gloss: random_gloss(rng),
            }
        })
        .collect();
    let facts = (0..rng.random_range(1..=6))
        .map(|_| LpFact {
            atom: ground_atom(rng, &sig),
            gloss: random_gloss(rng),
        })
        .collect();
    let rules = (0..rng.random_range(0..=max_rules))
        .map(|_| random_rule(rng, &sig))
        .collect();
    LpProgram {
        predicates,
        facts,
        rules,
        query: ground_atom(rng, &sig),
        query_gloss: random_gloss(rng),
    }
}

/// The program with facts, rules, rule bodies and heads, and declarations
/// shuffled.
pub fn shuffled(p: &LpProgram, rng: &mut TestRng) -> LpProgram {
    let mut q = p.clone();
    q.predicates.shuffle(rng);
    q.facts.shuffle(rng);
    q.rules.shuffle(rng);
    for r in &mut q.rules {
        r.body.shuffle(rng);
        r.head.shuffle(rng);
    }
    q
}

fn constants_of(p: &LpProgram) -> Vec<Term> {
    let mut out = BTreeSet::new();
    let atoms = p
        .facts
        .iter()
        .map(|f| &f.atom)
        .chain(p.rules.iter().flat_map(|r| r.body.iter().chain(&r.head)))
        .chain([&p.query]);
    for a in atoms {
        for t in &a.args {
            if let Term::Constant(_) = t {
                out.insert(t.clone());
            }
        }
    }
    out.into_iter().collect()
}

fn substitute(a: &Atom, vars: &[String], values: &[Term]) -> Atom {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Variable(v) => values[vars.iter().position(|x| x == v).unwrap()].clone(),
            other => other.clone(),
        })
        .collect();
    Atom::new(a.predicate.clone(), args)
}

/// Least fixpoint by repeatedly firing every ground instance of every rule
/// until nothing changes.
pub fn naive_fixpoint(p: &LpProgram) -> BTreeSet<Atom> {
    let universe = constants_of(p);
    let mut known: BTreeSet<Atom> = p.facts.iter().map(|f| f.atom.clone()).collect();
    loop {
        let mut fresh = Vec::new();
        for r in &p.rules {
            let vars: Vec<String> = r
                .body
                .iter()
                .flat_map(|a| a.variables())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let total = universe.len().pow(vars.len() as u32);
            for n in 0..total {
                let mut k = n;
                let values: Vec<Term> = vars
                    .iter()
                    .map(|_| {
                        let t = universe[k % universe.len()].clone();
                        k /= universe.len();
                        t
                    })
                    .collect();
                if r.body.iter().all(|b| known.contains(&substitute(b, &vars, &values))) {
                    fresh.extend(r.head.iter().map(|h| substitute(h, &vars, &values)));
                }
            }
        }
        let before = known.len();
        known.extend(fresh);
        if known.len() == before {
            return known;
        }
    }
}

fn flip(a: &Atom) -> Atom {
    let mut n = a.clone();
    if let Some(Term::Bool(b)) = n.args.last_mut() {
        *b = !*b;
    }
    n
}

/// Open-world reading of the query over the naive fixpoint.
pub fn naive_query(p: &LpProgram) -> LpOutcome {
    let facts = naive_fixpoint(p);
    match (facts.contains(&p.query), facts.contains(&flip(&p.query))) {
        (true, true) => LpOutcome::Inconsistent,
        (true, false) => LpOutcome::Verdict(TruthValue::Proved),
        (false, true) => LpOutcome::Verdict(TruthValue::Disproved),
        (false, false) => LpOutcome::Verdict(TruthValue::Unknown),
    }
}

pub fn engine_query(p: &LpProgram) -> LpOutcome {
    match lp_query(p, &LpLimits::default()) {
        Ok(v) => {
            assert!(v.warnings.is_empty(), "unexpected warnings {:?}", v.warnings);
            LpOutcome::Verdict(v.value)
        }
        Err(LpError::InconsistentProgram { .. }) => LpOutcome::Inconsistent,
        Err(e) => panic!("engine error {e}"),
    }
}

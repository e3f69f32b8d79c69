//! First-order problems: a generator and a truth-table oracle.
//!
//! The generated facts are ground or universally quantified and the query is
//! ground, so facts plus the negated query stay universal and function-free.
//! Such a set is satisfiable iff it has a model over its own constants,
//! which makes the truth table below an exact decision procedure.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use logiclm::fol::{resolve_entailment, FolError, ProverLimits};
use logiclm::ir::{Atom, Formula, Term, TruthValue};
use logiclm::syntax::fol::{FolProblem, FolStatement};

use super::{random_gloss, TestRng};

const PREDICATES: [&str; 5] = ["Cat", "Mammal", "Loves", "Reptile", "drinks coffee"];
const CONSTANTS: [&str; 5] = ["tom", "Jerry", "rina", "Czech person", "bonnie's"];
const VARIABLES: [&str; 2] = ["x", "y"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FolOutcome {
    Verdict(TruthValue),
    Inconsistent,
}

pub struct Signature {
    preds: Vec<(&'static str, usize)>,
    constants: Vec<&'static str>,
}

/// At most three predicates (one of them possibly binary) and at most three
/// constants.
pub fn signature(rng: &mut TestRng) -> Signature {
    let mut names = PREDICATES.to_vec();
    names.shuffle(rng);
    let n = rng.random_range(1..=3);
    let binary = rng.random_bool(0.4);
    let preds = names[..n]
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, if binary && i == 0 { 2 } else { 1 }))
        .collect();
    let mut constants = CONSTANTS.to_vec();
    constants.shuffle(rng);
    let k = rng.random_range(1..=3);
    Signature {
        preds,
        constants: constants[..k].to_vec(),
    }
}

fn atom(rng: &mut TestRng, sig: &Signature, vars: &[&str]) -> Formula {
    let (p, n) = sig.preds[rng.random_range(0..sig.preds.len())];
    let args = (0..n)
        .map(|_| {
            if !vars.is_empty() && rng.random_bool(0.75) {
                Term::var(vars[rng.random_range(0..vars.len())])
            } else {
                Term::constant(sig.constants[rng.random_range(0..sig.constants.len())])
            }
        })
        .collect();
    Formula::atom(p, args)
}

/// A quantifier-free formula over `vars` and the signature's constants.
fn matrix(rng: &mut TestRng, sig: &Signature, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.35) {
        let a = atom(rng, sig, vars);
        return if rng.random_bool(0.3) { Formula::not(a) } else { a };
    }
    let sub = |rng: &mut TestRng| matrix(rng, sig, vars, depth - 1);
    match rng.random_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 | 4 => Formula::implies(sub(rng), sub(rng)),
        5 => Formula::equiv(sub(rng), sub(rng)),
        6 => Formula::xor(sub(rng), sub(rng)),
        _ => {
            let items = (0..3).map(|_| sub(rng)).collect();
            if rng.random_bool(0.5) {
                Formula::AndList(items)
            } else {
                Formula::OrList(items)
            }
        }
    }
}

/// A ground fact or a universally closed one.
pub fn random_fact(rng: &mut TestRng, sig: &Signature) -> Formula {
    if rng.random_bool(0.35) {
        return matrix(rng, sig, &[], 2);
    }
    let vars = &VARIABLES[..rng.random_range(1..=VARIABLES.len())];
    vars.iter()
        .rev()
        .fold(matrix(rng, sig, vars, 2), |f, v| Formula::forall(*v, f))
}

/// At most six facts and a ground query over a fresh signature.
pub fn random_problem(rng: &mut TestRng) -> (Vec<Formula>, Formula) {
    let sig = signature(rng);
    let facts = (0..rng.random_range(1..=6)).map(|_| random_fact(rng, &sig)).collect();
    let query = matrix(rng, &sig, &[], 1);
    (facts, query)
}

/// Like [`random_problem`], with existentials, glosses and deeper nesting
/// for exercising the parser and printer.
pub fn random_syntax_problem(rng: &mut TestRng) -> FolProblem {
    let sig = signature(rng);
    let statement = |rng: &mut TestRng, quantified: bool| {
        let formula = if quantified {
            let vars = &VARIABLES[..rng.random_range(1..=VARIABLES.len())];
            vars.iter().rev().fold(matrix(rng, &sig, vars, 3), |f, v| {
                if rng.random_bool(0.5) {
                    Formula::forall(*v, f)
                } else {
                    Formula::exists(*v, f)
                }
            })
        } else {
            matrix(rng, &sig, &[], 3)
        };
        FolStatement {
            formula,
            gloss: random_gloss(rng),
        }
    };
    let n = rng.random_range(1..=6);
    let facts = (0..n)
        .map(|_| {
            let q = rng.random_bool(0.6);
            statement(rng, q)
        })
        .collect();
    let q = rng.random_bool(0.3);
    let query = statement(rng, q);
    FolProblem { facts, query }
}

/// Quantifier-free formula with atoms replaced by indices.
enum Ground {
    Atom(usize),
    Not(Box<Ground>),
    And(Vec<Ground>),
    Or(Vec<Ground>),
    Iff(Box<Ground>, Box<Ground>),
}

impl Ground {
    fn eval(&self, model: u32) -> bool {
        match self {
            Ground::Atom(i) => model >> i & 1 == 1,
            Ground::Not(g) => !g.eval(model),
            Ground::And(gs) => gs.iter().all(|g| g.eval(model)),
            Ground::Or(gs) => gs.iter().any(|g| g.eval(model)),
            Ground::Iff(a, b) => a.eval(model) == b.eval(model),
        }
    }
}

struct Grounder {
    universe: Vec<Term>,
    atoms: BTreeMap<Atom, usize>,
}

impl Grounder {
    fn ground(&mut self, f: &Formula, env: &mut Vec<(String, Term)>) -> Ground {
        let g = |s: &mut Self, f: &Formula, env: &mut Vec<(String, Term)>| Box::new(s.ground(f, env));
        match f {
            Formula::Atom(a) => {
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Variable(v) => env.iter().rev().find(|(n, _)| n == v).unwrap().1.clone(),
                        other => other.clone(),
                    })
                    .collect();
                let next = self.atoms.len();
                Ground::Atom(*self.atoms.entry(Atom::new(a.predicate.clone(), args)).or_insert(next))
            }
            Formula::Not(x) => Ground::Not(g(self, x, env)),
            Formula::And(a, b) => Ground::And(vec![self.ground(a, env), self.ground(b, env)]),
            Formula::Or(a, b) => Ground::Or(vec![self.ground(a, env), self.ground(b, env)]),
            Formula::AndList(xs) => Ground::And(xs.iter().map(|x| self.ground(x, env)).collect()),
            Formula::OrList(xs) => Ground::Or(xs.iter().map(|x| self.ground(x, env)).collect()),
            Formula::Implies(a, b) => Ground::Or(vec![Ground::Not(g(self, a, env)), self.ground(b, env)]),
            Formula::Equiv(a, b) => Ground::Iff(g(self, a, env), g(self, b, env)),
            Formula::Xor(a, b) => Ground::Not(Box::new(Ground::Iff(g(self, a, env), g(self, b, env)))),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let parts = self
                    .universe
                    .clone()
                    .into_iter()
                    .map(|c| {
                        env.push((v.clone(), c));
                        let part = self.ground(body, env);
                        env.pop();
                        part
                    })
                    .collect();
                if matches!(f, Formula::Forall(..)) {
                    Ground::And(parts)
                } else {
                    Ground::Or(parts)
                }
            }
        }
    }
}

fn collect_constants(f: &Formula, out: &mut BTreeSet<Term>) {
    match f {
        Formula::Atom(a) => out.extend(a.args.iter().filter(|t| matches!(t, Term::Constant(_))).cloned()),
        Formula::Not(x) | Formula::Forall(_, x) | Formula::Exists(_, x) => collect_constants(x, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) | Formula::Xor(a, b) => {
            collect_constants(a, out);
            collect_constants(b, out);
        }
        Formula::AndList(xs) | Formula::OrList(xs) => xs.iter().for_each(|x| collect_constants(x, out)),
    }
}

/// Three-valued entailment by enumerating every interpretation of the
/// ground atoms over the problem's constants.
pub fn truth_table(facts: &[Formula], query: &Formula) -> FolOutcome {
    let mut universe = BTreeSet::new();
    facts
        .iter()
        .chain([query])
        .for_each(|f| collect_constants(f, &mut universe));
    if universe.is_empty() {
        universe.insert(Term::constant("c0"));
    }
    let mut g = Grounder {
        universe: universe.into_iter().collect(),
        atoms: BTreeMap::new(),
    };
    let facts: Vec<Ground> = facts.iter().map(|f| g.ground(f, &mut Vec::new())).collect();
    let query = g.ground(query, &mut Vec::new());
    assert!(g.atoms.len() <= 20, "{} ground atoms", g.atoms.len());
    let (mut sat, mut holds, mut fails) = (false, false, false);
    for model in 0..1u32 << g.atoms.len() {
        if facts.iter().all(|f| f.eval(model)) {
            sat = true;
            if query.eval(model) {
                holds = true;
            } else {
                fails = true;
            }
            if holds && fails {
                break;
            }
        }
    }
    match (sat, holds, fails) {
        (false, _, _) => FolOutcome::Inconsistent,
        (_, true, false) => FolOutcome::Verdict(TruthValue::Proved),
        (_, false, true) => FolOutcome::Verdict(TruthValue::Disproved),
        _ => FolOutcome::Verdict(TruthValue::Unknown),
    }
}

/// The prover's answer; `None` when it gave up on clause-form size.
pub fn prover_outcome(facts: &[Formula], query: &Formula) -> Option<FolOutcome> {
    match resolve_entailment(facts, query, &ProverLimits::default()) {
        Ok(v) => Some(FolOutcome::Verdict(v.value)),
        Err(FolError::InconsistentFacts) => Some(FolOutcome::Inconsistent),
        Err(FolError::ClauseExplosion { .. }) => None,
        Err(e) => panic!("prover error {e}"),
    }
}

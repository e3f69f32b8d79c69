//! Deductive reasoning over logic programs.
//!
//! [`forward_chain`] computes the least fixpoint of the rules over the base
//! facts with semi-naive evaluation; [`lp_query`] reads the query under the
//! open-world assumption, using the trailing boolean argument as its
//! polarity; [`backward_prove`] searches for a proof tree goal-first.
//!
//! Rules with a conjunctive head are split into one rule per head atom
//! before evaluation. Range restriction is enforced by the parser, so every
//! derived fact is ground.

mod backward;
mod facts;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{Atom, Term, TruthValue, Verdict};
use crate::syntax::lp::LpProgram;

pub use backward::{backward_prove, ProofTree, RuleRef};
pub use facts::FactSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpLimits {
    pub max_derived_facts: usize,
    pub max_iterations: usize,
}

impl Default for LpLimits {
    fn default() -> Self {
        LpLimits {
            max_derived_facts: 100_000,
            max_iterations: 1_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("resource limit exceeded: {0}")]
    ResourceExhausted(String),
    #[error("the query '{0}' is not ground; queries must not contain variables")]
    NonGroundQuery(Atom),
    #[error("the program derives both '{positive}' and '{negative}'; the formulation is contradictory")]
    InconsistentProgram { positive: Atom, negative: Atom },
}

/// A rule with a single head atom, remembering where it came from.
#[derive(Clone, Debug)]
pub(crate) struct FlatRule {
    pub body: Vec<Atom>,
    pub head: Atom,
    pub origin: RuleRef,
}

pub(crate) fn flatten_rules(p: &LpProgram) -> Vec<FlatRule> {
    p.rules
        .iter()
        .enumerate()
        .flat_map(|(rule_index, r)| {
            r.head.iter().enumerate().map(move |(head_index, h)| FlatRule {
                body: r.body.clone(),
                head: h.clone(),
                origin: RuleRef { rule_index, head_index },
            })
        })
        .collect()
}

/// Variable bindings; rules have few variables, so a vector beats a map.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Bindings(Vec<(String, Term)>);

impl Bindings {
    pub fn get(&self, v: &str) -> Option<&Term> {
        self.0.iter().find(|(k, _)| k == v).map(|(_, t)| t)
    }

    /// Extends the bindings so that `pattern` matches the ground `fact`.
    pub fn match_atom(&self, pattern: &Atom, fact: &Atom) -> Option<Bindings> {
        if pattern.predicate != fact.predicate || pattern.args.len() != fact.args.len() {
            return None;
        }
        let mut out = self.clone();
        for (p, f) in pattern.args.iter().zip(&fact.args) {
            match p {
                Term::Variable(v) => match out.get(v) {
                    Some(bound) if bound != f => return None,
                    Some(_) => {}
                    None => out.0.push((v.clone(), f.clone())),
                },
                other if other != f => return None,
                _ => {}
            }
        }
        Some(out)
    }

    pub fn apply(&self, atom: &Atom) -> Atom {
        Atom::new(
            atom.predicate.clone(),
            atom.args
                .iter()
                .map(|t| match t {
                    Term::Variable(v) => self.get(v).cloned().unwrap_or_else(|| t.clone()),
                    other => other.clone(),
                })
                .collect(),
        )
    }

    pub fn bind(&mut self, v: &str, t: Term) {
        self.0.push((v.to_string(), t));
    }
}

/// Enumerates every binding that matches `body` against `facts`, with the
/// atom at `pinned` drawn from `pinned_facts` instead.
fn join(
    body: &[Atom],
    order: &[usize],
    pinned: usize,
    pinned_facts: &FactSet,
    facts: &FactSet,
    bindings: Bindings,
    emit: &mut dyn FnMut(&Bindings),
) {
    let Some((&i, rest)) = order.split_first() else {
        emit(&bindings);
        return;
    };
    let source = if i == pinned { pinned_facts } else { facts };
    let pattern = &body[i];
    for fact in source.with_predicate(&pattern.predicate) {
        if let Some(b) = bindings.match_atom(pattern, fact) {
            join(body, rest, pinned, pinned_facts, facts, b, emit);
        }
    }
}

/// Least fixpoint of the program's rules over its facts.
pub fn forward_chain(p: &LpProgram, limits: &LpLimits) -> Result<FactSet, LpError> {
    let rules = flatten_rules(p);
    let mut total = FactSet::new();
    let mut delta = FactSet::new();
    for f in &p.facts {
        if total.insert(f.atom.clone()) {
            delta.insert(f.atom.clone());
        }
    }
    let base = total.len();
    let mut iterations = 0;
    while !delta.is_empty() {
        iterations += 1;
        if iterations > limits.max_iterations {
            return Err(LpError::ResourceExhausted(format!(
                "forward chaining did not reach a fixpoint within {} iterations",
                limits.max_iterations
            )));
        }
        let mut fresh = FactSet::new();
        for rule in &rules {
            for pinned in 0..rule.body.len() {
                if delta.with_predicate(&rule.body[pinned].predicate).next().is_none() {
                    continue;
                }
                let order: Vec<usize> = std::iter::once(pinned)
                    .chain((0..rule.body.len()).filter(|&j| j != pinned))
                    .collect();
                join(
                    &rule.body,
                    &order,
                    pinned,
                    &delta,
                    &total,
                    Bindings::default(),
                    &mut |b| {
                        let head = b.apply(&rule.head);
                        if !total.contains(&head) {
                            fresh.insert(head);
                        }
                    },
                );
            }
        }
        if total.len() + fresh.len() - base > limits.max_derived_facts {
            return Err(LpError::ResourceExhausted(format!(
                "forward chaining derived more than {} facts",
                limits.max_derived_facts
            )));
        }
        for f in fresh.iter() {
            total.insert(f.clone());
        }
        delta = fresh;
    }
    Ok(total)
}

/// The query with its trailing boolean flipped, if it has one.
pub fn negate_polarity(q: &Atom) -> Option<Atom> {
    match q.args.last() {
        Some(Term::Bool(b)) => {
            let mut n = q.clone();
            *n.args.last_mut().unwrap() = Term::Bool(!b);
            Some(n)
        }
        _ => None,
    }
}

/// Answers the program's query: `Proved` when it is derivable, `Disproved`
/// when its polarity-flipped form is, `Unknown` otherwise. Hitting a
/// resource limit yields `Unknown` with a warning.
pub fn lp_query(p: &LpProgram, limits: &LpLimits) -> Result<Verdict, LpError> {
    let q = &p.query;
    if !q.is_ground() {
        return Err(LpError::NonGroundQuery(q.clone()));
    }
    let facts = match forward_chain(p, limits) {
        Ok(f) => f,
        Err(LpError::ResourceExhausted(msg)) => return Ok(Verdict::unknown_with(msg)),
        Err(e) => return Err(e),
    };
    let negated = negate_polarity(q);
    let pos = facts.contains(q);
    let neg = negated.as_ref().is_some_and(|n| facts.contains(n));
    match (pos, neg) {
        (true, true) => Err(LpError::InconsistentProgram {
            positive: q.clone(),
            negative: negated.unwrap(),
        }),
        (true, false) => Ok(Verdict::new(TruthValue::Proved)),
        (false, true) => Ok(Verdict::new(TruthValue::Disproved)),
        (false, false) => Ok(Verdict::new(TruthValue::Unknown)),
    }
}

impl fmt::Display for FactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.iter() {
            writeln!(f, "{}", crate::syntax::lp::print_atom(a))?;
        }
        Ok(())
    }
}

//! Brute-force model enumeration for small function-free clause sets.
//!
//! Used as an independent check on the prover: it shares no code with
//! resolution beyond the clause representation.

use indexmap::IndexSet;

use crate::ir::{Atom, Clause, Formula, Term, TruthValue};

use super::normal::{Clausifier, SkolemState};
use super::FolError;

pub const MAX_UNIVERSE: usize = 4;
pub const MAX_GROUND_ATOMS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelCount {
    pub satisfiable: bool,
    /// Models over the ground atoms that occur in the grounded clauses.
    pub count: u64,
    pub atoms: usize,
}

fn ground(t: &Term, vars: &[String], values: &[&Term]) -> Term {
    match t {
        Term::Variable(v) => {
            let i = vars
                .iter()
                .position(|x| x == v)
                .expect("variable collected from clause");
            values[i].clone()
        }
        other => other.clone(),
    }
}

fn has_function(c: &Clause) -> bool {
    c.literals()
        .iter()
        .any(|l| l.atom.args.iter().any(|t| matches!(t, Term::Func(..))))
}

/// Counts the interpretations of the ground atoms satisfying every ground
/// instance of `clauses` over `universe`.
pub fn enumerate_models(clauses: &[Clause], universe: &[Term]) -> Result<ModelCount, FolError> {
    if universe.is_empty() || universe.len() > MAX_UNIVERSE {
        return Err(FolError::OracleTooLarge(format!(
            "universe has {} elements; the oracle needs between 1 and {MAX_UNIVERSE}",
            universe.len()
        )));
    }
    if clauses.iter().any(has_function) {
        return Err(FolError::OracleTooLarge("function terms are not supported".into()));
    }
    let mut atoms: IndexSet<Atom> = IndexSet::new();
    // (positive mask, negative mask) per ground clause.
    let mut ground_clauses: Vec<(u32, u32)> = Vec::new();
    for c in clauses {
        let vars: Vec<String> = c.variables().into_iter().collect();
        let total = universe.len().pow(vars.len() as u32);
        for n in 0..total {
            let mut k = n;
            let values: Vec<&Term> = (0..vars.len())
                .map(|_| {
                    let v = &universe[k % universe.len()];
                    k /= universe.len();
                    v
                })
                .collect();
            let (mut pos, mut neg) = (0u32, 0u32);
            for l in c.literals() {
                let a = Atom::new(
                    l.atom.predicate.clone(),
                    l.atom.args.iter().map(|t| ground(t, &vars, &values)).collect(),
                );
                let (i, _) = atoms.insert_full(a);
                if i >= MAX_GROUND_ATOMS {
                    return Err(FolError::OracleTooLarge(format!(
                        "more than {MAX_GROUND_ATOMS} distinct ground atoms"
                    )));
                }
                if l.positive {
                    pos |= 1 << i;
                } else {
                    neg |= 1 << i;
                }
            }
            if pos & neg == 0 {
                ground_clauses.push((pos, neg));
            }
        }
    }
    let n = atoms.len();
    let mut count = 0u64;
    for interp in 0u32..(1u32 << n) {
        if ground_clauses
            .iter()
            .all(|&(pos, neg)| interp & pos != 0 || !interp & neg != 0)
        {
            count += 1;
        }
    }
    Ok(ModelCount {
        satisfiable: count > 0,
        count,
        atoms: n,
    })
}

fn constants(clauses: &[Clause]) -> Vec<Term> {
    let mut out = IndexSet::new();
    for c in clauses {
        for l in c.literals() {
            for t in &l.atom.args {
                if t.is_ground() {
                    out.insert(t.clone());
                }
            }
        }
    }
    out.into_iter().collect()
}

fn satisfiable(clauses: &[Clause]) -> Result<bool, FolError> {
    let mut universe = constants(clauses);
    if universe.is_empty() {
        universe.push(Term::constant("d0"));
    }
    Ok(enumerate_models(clauses, &universe)?.satisfiable)
}

/// Three-valued entailment decided by model enumeration over the Herbrand
/// universe of the clausified problem.
pub fn oracle_entailment(facts: &[Formula], query: &Formula) -> Result<TruthValue, FolError> {
    let mut cl = Clausifier::new(SkolemState::for_formulas(facts.iter().chain([query])), 10_000);
    let mut base = Vec::new();
    for f in facts {
        base.extend(cl.clausify(f)?);
    }
    if !satisfiable(&base)? {
        return Err(FolError::InconsistentFacts);
    }
    let with = |extra: Vec<Clause>| -> Vec<Clause> { base.iter().cloned().chain(extra).collect() };
    let negated = with(cl.clausify(&Formula::not(query.clone()))?);
    if !satisfiable(&negated)? {
        return Ok(TruthValue::Proved);
    }
    let asserted = with(cl.clausify(query)?);
    if !satisfiable(&asserted)? {
        return Ok(TruthValue::Disproved);
    }
    Ok(TruthValue::Unknown)
}

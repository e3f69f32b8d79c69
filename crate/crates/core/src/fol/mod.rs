//! First-order entailment by resolution.
//!
//! [`clausify`] turns closed formulas into clauses; [`resolve_entailment`]
//! runs two refutations, one with the query negated and one with it
//! asserted, and reads the verdict off which of them derives the empty
//! clause. [`enumerate_models`] decides small function-free problems by brute
//! force and serves as a test oracle.

mod log;
mod normal;
mod oracle;
mod prover;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{Clause, Formula, TruthValue, Verdict};

pub use log::{Derivation, Step, StepRule};
pub use normal::{clausify, skolemize, standardize_apart, to_nnf, Clausifier, SkolemState};
pub use oracle::{enumerate_models, oracle_entailment, ModelCount, MAX_GROUND_ATOMS, MAX_UNIVERSE};
pub use prover::{refute, ProverStats, RefutationResult, Saturation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProverLimits {
    pub max_clauses: usize,
    pub max_resolution_steps: usize,
    pub max_term_depth: usize,
}

impl Default for ProverLimits {
    fn default() -> Self {
        ProverLimits {
            max_clauses: 20_000,
            max_resolution_steps: 200_000,
            max_term_depth: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("clause form exceeds {limit} clauses")]
    ClauseExplosion { limit: usize },
    #[error("the facts contradict each other")]
    InconsistentFacts,
    #[error("problem is outside the model enumerator's bounds: {0}")]
    OracleTooLarge(String),
    #[error("formula has free variables: {}", .0.join(", "))]
    OpenFormula(Vec<String>),
}

/// One refutation attempt and the clauses it started from.
#[derive(Clone, Debug)]
pub struct SideReport {
    pub inputs: Vec<Clause>,
    pub result: RefutationResult,
}

#[derive(Clone, Debug)]
pub struct EntailmentReport {
    pub verdict: Verdict,
    /// Facts plus the negated query; refuting it proves the query.
    pub prove: Option<SideReport>,
    /// Facts plus the query; refuting it disproves the query.
    pub disprove: Option<SideReport>,
}

fn side_warnings(name: &str, side: &SideReport, limits: &ProverLimits, out: &mut Vec<String>) {
    match &side.result.outcome {
        Saturation::LimitReached(msg) => out.push(format!("{name} search stopped: {msg}")),
        Saturation::Saturated { depth_capped: true } => out.push(format!(
            "{name} search discarded clauses deeper than the term depth cap of {}",
            limits.max_term_depth
        )),
        _ => {}
    }
}

/// Like [`resolve_entailment`], but keeps both saturation runs, including
/// the derivation of any refutation.
pub fn entailment_report(
    facts: &[Formula],
    query: &Formula,
    limits: &ProverLimits,
) -> Result<EntailmentReport, FolError> {
    let mut cl = Clausifier::new(
        SkolemState::for_formulas(facts.iter().chain([query])),
        limits.max_clauses,
    );
    let clauses = (|| {
        let mut base = Vec::new();
        for f in facts {
            base.extend(cl.clausify(f)?);
        }
        let negated = cl.clausify(&Formula::not(query.clone()))?;
        let asserted = cl.clausify(query)?;
        Ok((base, negated, asserted))
    })();
    let (base, negated, asserted) = match clauses {
        Ok(c) => c,
        Err(FolError::ClauseExplosion { limit }) => {
            return Ok(EntailmentReport {
                verdict: Verdict::unknown_with(format!("clause form exceeds the limit of {limit} clauses")),
                prove: None,
                disprove: None,
            })
        }
        Err(e) => return Err(e),
    };

    let run = |extra: Vec<Clause>| {
        let support: Vec<bool> = base.iter().map(|_| false).chain(extra.iter().map(|_| true)).collect();
        let inputs: Vec<Clause> = base.iter().cloned().chain(extra).collect();
        let result = refute(&inputs, &support, limits);
        SideReport { inputs, result }
    };
    let (prove, disprove) = rayon::join(|| run(negated), || run(asserted));

    let refuted = |s: &SideReport| match s.result.outcome {
        Saturation::Refuted { uses_support } => Some(uses_support),
        _ => None,
    };
    let verdict = match (refuted(&prove), refuted(&disprove)) {
        (Some(false), _) | (_, Some(false)) | (Some(true), Some(true)) => return Err(FolError::InconsistentFacts),
        (Some(true), None) => Verdict::new(TruthValue::Proved),
        (None, Some(true)) => Verdict::new(TruthValue::Disproved),
        (None, None) => {
            let mut v = Verdict::new(TruthValue::Unknown);
            side_warnings("proof", &prove, limits, &mut v.warnings);
            side_warnings("disproof", &disprove, limits, &mut v.warnings);
            v
        }
    };
    Ok(EntailmentReport {
        verdict,
        prove: Some(prove),
        disprove: Some(disprove),
    })
}

/// Proved when the facts entail the query, Disproved when they entail its
/// negation, Unknown otherwise or when a limit stops the search (with a
/// warning saying which).
pub fn resolve_entailment(facts: &[Formula], query: &Formula, limits: &ProverLimits) -> Result<Verdict, FolError> {
    entailment_report(facts, query, limits).map(|r| r.verdict)
}

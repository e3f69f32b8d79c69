//! One problem through the pipeline: formulate, execute, refine, interpret.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::csp::{evaluate_options, CspError, DEFAULT_MAX_SOLUTIONS};
use crate::fol::{resolve_entailment, FolError, ProverLimits};
use crate::ir::{TruthValue, Verdict};
use crate::lp::{lp_query, LpError, LpLimits};
use crate::syntax::csp::CspModel;
use crate::syntax::fol::FolProblem;
use crate::syntax::lp::LpProgram;
use crate::syntax::sections::split_sections;
use crate::syntax::{parse_csp, parse_fol, parse_lp, print_csp, print_fol, print_lp, ParseError};

use super::problem::{option_meaning, OptionMeaning, Problem, TaskKind};
use super::provider::{Provider, ProviderConfig, ProviderError, ProviderRequest};
use super::template::{build_prompt, build_refine_prompt, refine_template_name, TemplateError, TemplateSet};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// A parsed formulation in the language of its task kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Program {
    Lp(LpProgram),
    Fol(FolProblem),
    Csp(CspModel),
}

impl Program {
    pub fn parse(kind: TaskKind, text: &str) -> Result<(Program, Vec<String>), Vec<ParseError>> {
        let r = match kind {
            TaskKind::Deductive => parse_lp(text).map(|p| (Program::Lp(p.value), p.warnings)),
            TaskKind::Fol => parse_fol(text).map(|p| (Program::Fol(p.value), p.warnings)),
            TaskKind::Csp => parse_csp(text).map(|p| (Program::Csp(p.value), p.warnings)),
        };
        r.map_err(|e| e.0)
    }

    pub fn print(&self) -> String {
        match self {
            Program::Lp(p) => print_lp(p),
            Program::Fol(p) => print_fol(p),
            Program::Csp(m) => print_csp(m),
        }
    }
}

pub fn section_names(kind: TaskKind) -> &'static [&'static str] {
    match kind {
        TaskKind::Deductive => &["Predicates", "Facts", "Rules", "Query"],
        TaskKind::Fol => &["Predicates", "Facts", "Query"],
        TaskKind::Csp => &["Domain", "Variables", "Constraints", "Query"],
    }
}

/// The program text to parse from a provider response. Prompts end on the
/// first section header, so a model that simply continues the prompt omits
/// it; in that case the header is put back.
pub fn program_text(kind: TaskKind, response: &str, continuation: Option<&str>) -> String {
    let names = section_names(kind);
    let header = continuation.and_then(|h| {
        let name = h.trim_end_matches(':').trim();
        names.iter().find(|n| n.eq_ignore_ascii_case(name))
    });
    match header {
        Some(name) if split_sections(response, names).get(name).is_none() => format!("{name}:\n{response}"),
        _ => response.to_string(),
    }
}

/// One provider response and what the parser made of it.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Formulation {
    pub round: usize,
    pub prompt: String,
    pub raw_text: String,
    /// `raw_text` with the continuation header restored if needed.
    pub program_text: String,
    #[serde(skip)]
    pub parsed: Option<Program>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_errors: Vec<ParseError>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Formulation {
    pub fn new(kind: TaskKind, round: usize, prompt: String, raw_text: String, continuation: Option<&str>) -> Self {
        let program_text = program_text(kind, &raw_text, continuation);
        let (parsed, parse_errors, warnings) = match Program::parse(kind, &program_text) {
            Ok((p, w)) => (Some(p), Vec::new(), w),
            Err(e) => (None, e, Vec::new()),
        };
        Formulation {
            round,
            prompt,
            raw_text,
            program_text,
            parsed,
            parse_errors,
            warnings,
        }
    }
}

/// A solver failure that points at a bad formulation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExecutionError {
    #[error("logic program solver: {0}")]
    Lp(LpError),
    #[error("first-order logic solver: {0}")]
    Fol(FolError),
    #[error("constraint solver: {0}")]
    Csp(CspError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolicResult {
    /// Logic program and first-order queries.
    Entailment(Verdict),
    /// Constraint models: one verdict per lettered option.
    Options {
        verdicts: BTreeMap<char, TruthValue>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<String>,
    },
}

impl SymbolicResult {
    pub fn warnings(&self) -> &[String] {
        match self {
            SymbolicResult::Entailment(v) => &v.warnings,
            SymbolicResult::Options { warnings, .. } => warnings,
        }
    }
}

impl fmt::Display for SymbolicResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicResult::Entailment(v) => write!(f, "{}", v.value),
            SymbolicResult::Options { verdicts, .. } => {
                let parts: Vec<String> = verdicts.iter().map(|(l, v)| format!("{l}: {v}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveLimits {
    pub lp: LpLimits,
    pub fol: ProverLimits,
    pub max_solutions: usize,
    /// Wall-clock budget per symbolic solve; running out yields Unknown.
    pub budget_seconds: Option<f64>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            lp: LpLimits::default(),
            fol: ProverLimits::default(),
            max_solutions: DEFAULT_MAX_SOLUTIONS,
            budget_seconds: Some(30.0),
        }
    }
}

/// Dispatches to the engine for the program's language. Resource limits
/// give Unknown with a warning; anything else that goes wrong is an
/// [`ExecutionError`] for the refiner.
pub fn solve_symbolic(program: &Program, limits: &SolveLimits) -> Result<SymbolicResult, ExecutionError> {
    match program {
        Program::Lp(p) => lp_query(p, &limits.lp)
            .map(SymbolicResult::Entailment)
            .map_err(ExecutionError::Lp),
        Program::Fol(p) => resolve_entailment(&p.fact_formulas(), &p.query.formula, &limits.fol)
            .map(SymbolicResult::Entailment)
            .map_err(ExecutionError::Fol),
        Program::Csp(m) => match evaluate_options(m, limits.max_solutions) {
            Ok(verdicts) => Ok(SymbolicResult::Options {
                verdicts,
                warnings: Vec::new(),
            }),
            Err(CspError::SolutionCapExceeded { cap }) => Ok(SymbolicResult::Options {
                verdicts: m.options.keys().map(|&l| (l, TruthValue::Unknown)).collect(),
                warnings: vec![format!("more than {cap} solutions; every option left Unknown")],
            }),
            Err(e) => Err(ExecutionError::Csp(e)),
        },
    }
}

fn unknown_for(program: &Program, warning: String) -> SymbolicResult {
    match program {
        Program::Csp(m) => SymbolicResult::Options {
            verdicts: m.options.keys().map(|&l| (l, TruthValue::Unknown)).collect(),
            warnings: vec![warning],
        },
        _ => SymbolicResult::Entailment(Verdict::unknown_with(warning)),
    }
}

/// [`solve_symbolic`] under the wall-clock budget in `limits`. A solve that
/// overruns is abandoned on its worker thread.
pub fn solve_with_budget(program: &Program, limits: &SolveLimits) -> Result<SymbolicResult, ExecutionError> {
    let Some(secs) = limits.budget_seconds.filter(|s| s.is_finite() && *s > 0.0) else {
        return solve_symbolic(program, limits);
    };
    let (tx, rx) = mpsc::channel();
    let owned = program.clone();
    let l = *limits;
    std::thread::spawn(move || {
        let _ = tx.send(solve_symbolic(&owned, &l));
    });
    match rx.recv_timeout(Duration::from_secs_f64(secs)) {
        Ok(r) => r,
        Err(_) => Ok(unknown_for(
            program,
            format!("symbolic solve exceeded the {secs} s budget"),
        )),
    }
}

/// One round: a formulation plus the outcome of executing it.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Attempt {
    #[serde(flatten)]
    pub formulation: Formulation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<SymbolicResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution_error: Option<String>,
}

impl Attempt {
    pub fn execute(formulation: Formulation, limits: &SolveLimits) -> Attempt {
        let (result, execution_error) = match &formulation.parsed {
            None => (None, None),
            Some(p) => match solve_with_budget(p, limits) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            },
        };
        Attempt {
            formulation,
            result,
            execution_error,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.result.is_some()
    }

    /// The error text shown to the refiner, if this round failed.
    pub fn error_report(&self) -> Option<String> {
        if !self.formulation.parse_errors.is_empty() {
            let lines: Vec<String> = self.formulation.parse_errors.iter().map(|e| e.to_string()).collect();
            return Some(lines.join("\n"));
        }
        self.execution_error.clone()
    }
}

/// A multiple-choice answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Letter(char),
    Abstain,
}

impl Answer {
    pub fn letter(self) -> Option<char> {
        match self {
            Answer::Letter(l) => Some(l),
            Answer::Abstain => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Letter(l) => write!(f, "{l}"),
            Answer::Abstain => f.write_str("Abstain"),
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            _ if s == "Abstain" => Ok(Answer::Abstain),
            (Some(c), None) if c.is_ascii_uppercase() => Ok(Answer::Letter(c)),
            _ => Err(serde::de::Error::custom(format!("bad answer '{s}'"))),
        }
    }
}

/// What to answer when the symbolic result does not pick out one option.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backoff {
    #[default]
    Abstain,
    /// The first remaining candidate.
    FixedFirst,
    /// A candidate drawn from a generator seeded by the run seed and the
    /// problem id.
    SeededRandom,
}

impl FromStr for Backoff {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "abstain" => Ok(Backoff::Abstain),
            "fixed-first" => Ok(Backoff::FixedFirst),
            "seeded-random" => Ok(Backoff::SeededRandom),
            _ => Err(format!("unknown backoff '{s}' (abstain, fixed-first, seeded-random)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub answer: Answer,
    /// Set when the backoff policy chose the answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

fn problem_seed(seed: u64, id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(bytes)
}

fn back_off(policy: Backoff, seed: u64, p: &Problem, candidates: &[char], why: String) -> Interpretation {
    let answer = match (policy, candidates) {
        (Backoff::Abstain, _) | (_, []) => Answer::Abstain,
        (Backoff::FixedFirst, [first, ..]) => Answer::Letter(*first),
        (Backoff::SeededRandom, c) => {
            let mut rng = ChaCha8Rng::seed_from_u64(problem_seed(seed, &p.id));
            Answer::Letter(c[rng.random_range(0..c.len())])
        }
    };
    Interpretation {
        answer,
        diagnostic: Some(why),
    }
}

/// Maps a symbolic result to an option letter under the default (abstain)
/// policy.
pub fn interpret(result: &SymbolicResult, p: &Problem) -> Interpretation {
    interpret_with(Some(result), p, Backoff::Abstain, 0)
}

/// Total: every result and option set yields a letter or `Abstain`. `None`
/// stands for "no valid formulation".
pub fn interpret_with(result: Option<&SymbolicResult>, p: &Problem, policy: Backoff, seed: u64) -> Interpretation {
    let all: Vec<char> = p.letters().collect();
    let Some(result) = result else {
        return back_off(policy, seed, p, &all, "no valid formulation".to_string());
    };
    match result {
        SymbolicResult::Entailment(v) => {
            let meaning = match v.value {
                TruthValue::Proved => OptionMeaning::True,
                TruthValue::Disproved => OptionMeaning::False,
                TruthValue::Unknown => OptionMeaning::Unknown,
            };
            match p.options.iter().find(|(_, t)| option_meaning(t) == Some(meaning)) {
                Some((l, _)) => Interpretation {
                    answer: Answer::Letter(*l),
                    diagnostic: None,
                },
                None => back_off(policy, seed, p, &all, format!("verdict {} matches no option", v.value)),
            }
        }
        SymbolicResult::Options { verdicts, .. } => {
            let proved: Vec<char> = all
                .iter()
                .copied()
                .filter(|l| verdicts.get(l) == Some(&TruthValue::Proved))
                .collect();
            match proved.as_slice() {
                [one] => Interpretation {
                    answer: Answer::Letter(*one),
                    diagnostic: None,
                },
                [] => back_off(policy, seed, p, &all, "no option is proved".to_string()),
                many => {
                    let list: Vec<String> = many.iter().map(char::to_string).collect();
                    let why = format!("options {} are all proved", list.join(", "));
                    back_off(policy, seed, p, many, why)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub provider: ProviderConfig,
    pub max_rounds: usize,
    pub backoff: Backoff,
    pub seed: u64,
    pub limits: SolveLimits,
    /// Worker threads for evaluation; defaults to the logical core count.
    pub workers: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            provider: ProviderConfig::default(),
            max_rounds: 3,
            backoff: Backoff::Abstain,
            seed: 0,
            limits: SolveLimits::default(),
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Everything that happened to one problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub schema_version: u32,
    pub problem_id: String,
    pub task_kind: TaskKind,
    pub rounds: Vec<Attempt>,
    pub provider_calls: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub result: Option<SymbolicResult>,
    #[serde(flatten)]
    pub interpretation: Interpretation,
    pub gold: Option<char>,
    pub correct: Option<bool>,
    pub elapsed_ms: u64,
}

impl PipelineTrace {
    pub fn answer(&self) -> Answer {
        self.interpretation.answer
    }

    /// Whether the formulation in force after `round` was invalid. A problem
    /// whose loop stopped earlier keeps its last state.
    pub fn invalid_at(&self, round: usize) -> bool {
        match self.rounds.get(round).or(self.rounds.last()) {
            Some(a) => !a.is_valid(),
            None => true,
        }
    }
}

pub struct Pipeline<'a> {
    provider: &'a dyn Provider,
    templates: &'a TemplateSet,
    config: &'a PipelineConfig,
}

impl<'a> Pipeline<'a> {
    pub fn new(provider: &'a dyn Provider, templates: &'a TemplateSet, config: &'a PipelineConfig) -> Self {
        Pipeline {
            provider,
            templates,
            config,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        self.config
    }

    fn call(&self, p: &Problem, round: usize, prompt: &str, calls: &mut usize) -> Result<String, ProviderError> {
        *calls += 1;
        self.provider.complete(&ProviderRequest {
            problem_id: &p.id,
            round,
            prompt,
        })
    }

    /// Round 0: prompt the provider and parse its answer. Parse failures are
    /// recorded in the formulation.
    pub fn formulate(&self, p: &Problem, calls: &mut usize) -> Result<Formulation, PipelineError> {
        let template = self.templates.get(p.template_name())?;
        let prompt = build_prompt(p, self.templates, self.config.provider.num_examples)?;
        let raw = self.call(p, 0, &prompt, calls)?;
        Ok(Formulation::new(p.task_kind, 0, prompt, raw, template.continuation()))
    }

    /// Repairs the last round in `rounds` until it is valid or `max_rounds`
    /// refinements have been made. Each new round is appended. Makes no
    /// provider call if the last round is already valid.
    pub fn self_refine(&self, p: &Problem, rounds: &mut Vec<Attempt>, calls: &mut usize) -> Result<(), PipelineError> {
        while let Some(last) = rounds.last() {
            let Some(error) = last.error_report() else { break };
            let round = last.formulation.round + 1;
            if round > self.config.max_rounds {
                break;
            }
            let template = self.templates.get(&refine_template_name(p))?;
            let prompt = build_refine_prompt(
                p,
                self.templates,
                self.config.provider.num_examples,
                &last.formulation.program_text,
                &error,
            )?;
            let raw = self.call(p, round, &prompt, calls)?;
            let f = Formulation::new(p.task_kind, round, prompt, raw, template.continuation());
            rounds.push(Attempt::execute(f, &self.config.limits));
        }
        Ok(())
    }

    pub fn solve(&self, p: &Problem) -> PipelineTrace {
        let start = Instant::now();
        let mut rounds = Vec::new();
        let mut calls = 0;
        let outcome = self.formulate(p, &mut calls).and_then(|f| {
            rounds.push(Attempt::execute(f, &self.config.limits));
            self.self_refine(p, &mut rounds, &mut calls)
        });
        let error = outcome.err().map(|e| e.to_string());
        let result = rounds.last().and_then(|a| a.result.clone());
        let mut interpretation = interpret_with(result.as_ref(), p, self.config.backoff, self.config.seed);
        if let (Some(e), Some(d)) = (&error, interpretation.diagnostic.as_mut()) {
            d.push_str(&format!(" ({e})"));
        }
        let correct = p.gold.map(|g| interpretation.answer == Answer::Letter(g));
        PipelineTrace {
            schema_version: TRACE_SCHEMA_VERSION,
            problem_id: p.id.clone(),
            task_kind: p.task_kind,
            rounds,
            provider_calls: calls,
            error,
            result,
            interpretation,
            gold: p.gold,
            correct,
            elapsed_ms: start.elapsed().as_millis() as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::provider::ScriptedProvider;

    fn problem(kind: TaskKind, options: &[&str]) -> Problem {
        let opts: Vec<String> = options.iter().map(|s| format!("\"{s}\"")).collect();
        serde_json::from_str(&format!(
            r#"{{"id": "t", "task_kind": "{}", "context": "c", "question": "q", "options": [{}]}}"#,
            kind.name(),
            opts.join(", ")
        ))
        .unwrap()
    }

    const VALID_LP: &str = "Predicates:\nP($x, bool)\n\nFacts:\nP(a, True)\n\nRules:\n\nQuery:\nP(a, True)\n";
    const BAD_LP: &str = "Predicates:\nP($x, bool)\n\nFacts:\nQ(a, True)\n\nRules:\n\nQuery:\nP(a, True)\n";

    fn scripted(responses: &[&str]) -> ScriptedProvider {
        ScriptedProvider::new(BTreeMap::from([(
            "t".to_string(),
            responses.iter().map(|s| s.to_string()).collect(),
        )]))
    }

    fn run(responses: &[&str], max_rounds: usize) -> PipelineTrace {
        let p = problem(TaskKind::Deductive, &["A) True", "B) False", "C) Unknown"]);
        let provider = scripted(responses);
        let templates = TemplateSet::shipped();
        let config = PipelineConfig {
            max_rounds,
            ..Default::default()
        };
        Pipeline::new(&provider, &templates, &config).solve(&p)
    }

    #[test]
    fn interpret_entailment() {
        let p = problem(TaskKind::Deductive, &["A) True", "B) False", "C) Unknown"]);
        let v = |t| SymbolicResult::Entailment(Verdict::new(t));
        assert_eq!(interpret(&v(TruthValue::Proved), &p).answer, Answer::Letter('A'));
        assert_eq!(interpret(&v(TruthValue::Disproved), &p).answer, Answer::Letter('B'));
        assert_eq!(interpret(&v(TruthValue::Unknown), &p).answer, Answer::Letter('C'));
        let two = problem(TaskKind::Deductive, &["A) True", "B) False"]);
        let i = interpret(&v(TruthValue::Unknown), &two);
        assert_eq!(i.answer, Answer::Abstain);
        assert!(i.diagnostic.is_some());
        let first = interpret_with(Some(&v(TruthValue::Unknown)), &two, Backoff::FixedFirst, 0);
        assert_eq!(first.answer, Answer::Letter('A'));
    }

    #[test]
    fn interpret_options() {
        let p = problem(TaskKind::Csp, &["A) x", "B) y", "C) z"]);
        let map = |vs: [TruthValue; 3]| SymbolicResult::Options {
            verdicts: ['A', 'B', 'C'].into_iter().zip(vs).collect(),
            warnings: vec![],
        };
        use TruthValue::*;
        assert_eq!(
            interpret(&map([Disproved, Proved, Disproved]), &p).answer,
            Answer::Letter('B')
        );
        assert_eq!(
            interpret(&map([Unknown, Unknown, Disproved]), &p).answer,
            Answer::Abstain
        );
        let both = map([Proved, Proved, Disproved]);
        assert_eq!(interpret(&both, &p).answer, Answer::Abstain);
        for seed in 0..20 {
            let a = interpret_with(Some(&both), &p, Backoff::SeededRandom, seed).answer;
            assert!(matches!(a, Answer::Letter('A' | 'B')));
            assert_eq!(a, interpret_with(Some(&both), &p, Backoff::SeededRandom, seed).answer);
        }
    }

    #[test]
    fn answer_serde() {
        assert_eq!(serde_json::to_string(&Answer::Letter('B')).unwrap(), "\"B\"");
        assert_eq!(serde_json::from_str::<Answer>("\"Abstain\"").unwrap(), Answer::Abstain);
        assert!(serde_json::from_str::<Answer>("\"AB\"").is_err());
    }

    #[test]
    fn continuation_header_is_restored() {
        let body = "P($x, bool)\n\nFacts:\nP(a, True)\n\nRules:\n\nQuery:\nP(a, True)\n";
        let t = program_text(TaskKind::Deductive, body, Some("Predicates:"));
        assert!(t.starts_with("Predicates:\nP($x"));
        assert_eq!(
            program_text(TaskKind::Deductive, VALID_LP, Some("Predicates:")),
            VALID_LP
        );
        assert_eq!(
            program_text(TaskKind::Deductive, body, Some("Corrected program:")),
            body
        );
    }

    #[test]
    fn valid_first_round_makes_one_call() {
        let t = run(&[VALID_LP], 3);
        assert_eq!(t.provider_calls, 1);
        assert_eq!(t.rounds.len(), 1);
        assert_eq!(t.answer(), Answer::Letter('A'));
        assert!(t.rounds[0].formulation.prompt.ends_with("Predicates:\n"));
    }

    #[test]
    fn invalid_then_valid() {
        let t = run(&[BAD_LP, VALID_LP], 3);
        assert_eq!(t.rounds.len(), 2);
        assert!(t.invalid_at(0));
        assert!(!t.invalid_at(1) && !t.invalid_at(3));
        let refine = &t.rounds[1].formulation.prompt;
        assert!(refine.contains("unknown predicate"), "{refine}");
        assert!(refine.contains("Q(a, True)"));
        assert_eq!(t.answer(), Answer::Letter('A'));
    }

    #[test]
    fn refinement_is_capped() {
        let t = run(&[BAD_LP, BAD_LP, BAD_LP, BAD_LP, BAD_LP], 3);
        assert_eq!(t.provider_calls, 4);
        assert_eq!(t.rounds.len(), 4);
        assert!(t.invalid_at(3));
        assert_eq!(t.answer(), Answer::Abstain);
        let t = run(&[BAD_LP, VALID_LP], 0);
        assert_eq!(t.provider_calls, 1);
    }

    #[test]
    fn provider_failure_keeps_partial_trace() {
        let t = run(&[BAD_LP], 3);
        assert_eq!(t.rounds.len(), 1);
        assert_eq!(t.provider_calls, 2);
        assert!(t.error.as_deref().unwrap().contains("round 1"));
        assert_eq!(t.answer(), Answer::Abstain);
    }

    #[test]
    fn empty_response_reports_missing_sections() {
        let t = run(&[""], 0);
        let kinds: Vec<_> = t.rounds[0].formulation.parse_errors.iter().map(|e| e.kind).collect();
        assert!(
            kinds.contains(&crate::syntax::ParseErrorKind::MissingSection),
            "{kinds:?}"
        );
    }

    #[test]
    fn execution_errors_are_refinable() {
        let contradictory = "Facts:\nAtom('P', 'a')\nNot(Atom('P', 'a'))\n\nQuery:\nAtom('P', 'a')\n";
        let f = Formulation::new(TaskKind::Fol, 0, String::new(), contradictory.to_string(), None);
        let a = Attempt::execute(f, &SolveLimits::default());
        assert!(!a.is_valid());
        assert!(a.error_report().unwrap().contains("contradict"));
    }
}

//! Dataset evaluation: run every problem, score answers, persist traces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::problem::{load_dataset, DatasetError, Problem};
use super::run::{Answer, Pipeline, PipelineTrace};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub total: usize,
    /// Problems with a gold label.
    pub labeled: usize,
    pub correct: usize,
    pub abstentions: usize,
    /// `correct / labeled`, 0 when nothing is labeled.
    pub accuracy: f64,
}

impl Score {
    fn add(&mut self, t: &PipelineTrace) {
        self.total += 1;
        self.labeled += t.gold.is_some() as usize;
        self.correct += (t.correct == Some(true)) as usize;
        self.abstentions += (t.answer() == Answer::Abstain) as usize;
        self.accuracy = if self.labeled == 0 {
            0.0
        } else {
            self.correct as f64 / self.labeled as f64
        };
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub id: String,
    pub dataset: String,
    pub answer: Answer,
    pub gold: Option<char>,
    pub correct: Option<bool>,
    /// Rounds actually run, initial formulation included.
    pub rounds: usize,
    pub provider_calls: usize,
    pub valid: bool,
    pub result: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregate results. `elapsed_ms` is the only timing field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub max_rounds: usize,
    #[serde(flatten)]
    pub overall: Score,
    pub per_dataset: BTreeMap<String, Score>,
    /// Entry `r` is the fraction of problems whose formulation after `r`
    /// refinement rounds still fails to parse or execute.
    pub error_rate: Vec<f64>,
    pub provider_calls: usize,
    pub problems: Vec<ProblemSummary>,
    pub elapsed_ms: u64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn dataset_name(p: &Problem) -> String {
    p.dataset.clone().unwrap_or_else(|| p.task_kind.name().to_string())
}

/// File name for a problem's trace: the id with anything outside
/// `[A-Za-z0-9._-]` replaced.
pub fn trace_file_name(id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.json")
}

fn write_trace(dir: &Path, t: &PipelineTrace) -> Result<(), EvalError> {
    let path = dir.join(trace_file_name(&t.problem_id));
    let mut text = serde_json::to_string_pretty(t).expect("trace serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn summarize(problems: &[Problem], traces: &[PipelineTrace], max_rounds: usize, elapsed_ms: u64) -> EvalReport {
    let mut overall = Score::default();
    let mut per_dataset: BTreeMap<String, Score> = BTreeMap::new();
    let mut summaries = Vec::with_capacity(traces.len());
    let mut calls = 0;
    for (p, t) in problems.iter().zip(traces) {
        let name = dataset_name(p);
        overall.add(t);
        per_dataset.entry(name.clone()).or_default().add(t);
        calls += t.provider_calls;
        summaries.push(ProblemSummary {
            id: p.id.clone(),
            dataset: name,
            answer: t.answer(),
            gold: t.gold,
            correct: t.correct,
            rounds: t.rounds.len(),
            provider_calls: t.provider_calls,
            valid: t.result.is_some(),
            result: t.result.as_ref().map(|r| r.to_string()),
            diagnostic: t.interpretation.diagnostic.clone(),
            error: t.error.clone(),
        });
    }
    let error_rate = (0..=max_rounds)
        .map(|r| {
            if traces.is_empty() {
                0.0
            } else {
                traces.iter().filter(|t| t.invalid_at(r)).count() as f64 / traces.len() as f64
            }
        })
        .collect();
    EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        max_rounds,
        overall,
        per_dataset,
        error_rate,
        provider_calls: calls,
        problems: summaries,
        elapsed_ms,
    }
}

/// Runs every problem on a bounded worker pool. Traces are written to
/// `trace_dir` as each problem finishes, so an interrupted run keeps what
/// it completed. Report order follows the dataset.
pub fn run_eval(
    problems: &[Problem],
    pipeline: &Pipeline<'_>,
    trace_dir: Option<&Path>,
) -> Result<EvalReport, EvalError> {
    let start = Instant::now();
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|source| EvalError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    let workers = pipeline
        .config()
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;
    let traces: Vec<PipelineTrace> = pool.install(|| {
        problems
            .par_iter()
            .map(|p| {
                let t = pipeline.solve(p);
                log::info!("{}: {} after {} round(s)", p.id, t.answer(), t.rounds.len());
                match trace_dir.map(|d| write_trace(d, &t)) {
                    Some(Err(e)) => Err(e),
                    _ => Ok(t),
                }
            })
            .collect::<Result<_, _>>()
    })?;
    Ok(summarize(
        problems,
        &traces,
        pipeline.config().max_rounds,
        start.elapsed().as_millis() as u64,
    ))
}

pub fn run_eval_file(
    dataset: &Path,
    pipeline: &Pipeline<'_>,
    trace_dir: Option<&Path>,
) -> Result<EvalReport, EvalError> {
    let problems = load_dataset(dataset)?;
    run_eval(&problems, pipeline, trace_dir)
}

/// Default trace directory for a report path: `<report stem>.traces` next
/// to it.
pub fn default_trace_dir(report: &Path) -> PathBuf {
    let stem = report.file_stem().unwrap_or_default().to_string_lossy();
    report.with_file_name(format!("{stem}.traces"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::provider::ScriptedProvider;
    use crate::pipeline::run::PipelineConfig;
    use crate::pipeline::template::TemplateSet;

    #[test]
    fn empty_dataset_is_well_defined() {
        let provider = ScriptedProvider::default();
        let templates = TemplateSet::shipped();
        let config = PipelineConfig::default();
        let pipeline = Pipeline::new(&provider, &templates, &config);
        let r = run_eval(&[], &pipeline, None).unwrap();
        assert_eq!(r.overall.total, 0);
        assert_eq!(r.overall.accuracy, 0.0);
        assert_eq!(r.error_rate, vec![0.0; 4]);
        assert!(r.to_json().contains("\"accuracy\": 0.0"));
    }

    #[test]
    fn trace_names_are_safe() {
        assert_eq!(trace_file_name("a/b c.1"), "a_b_c.1.json");
        assert_eq!(
            default_trace_dir(Path::new("out/report.json")),
            Path::new("out/report.traces")
        );
    }
}

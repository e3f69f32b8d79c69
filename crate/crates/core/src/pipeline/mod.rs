//! The solve pipeline: problem formulation by a text-generation provider,
//! symbolic reasoning by the engine for the task kind, and interpretation of
//! the result as an option letter, with a refinement loop that feeds parser
//! and solver errors back to the provider.

pub mod eval;
pub mod problem;
pub mod provider;
pub mod run;
pub mod template;

pub use eval::{run_eval, run_eval_file, EvalError, EvalReport, Score};
pub use problem::{load_dataset, parse_dataset, DatasetError, OptionMeaning, Problem, TaskKind};
pub use provider::{
    Fixture, LiveProvider, Provider, ProviderConfig, ProviderError, ProviderRequest, RecordingProvider, ReplayProvider,
    ScriptedProvider,
};
pub use run::{
    interpret, interpret_with, solve_symbolic, Answer, Attempt, Backoff, ExecutionError, Formulation, Interpretation,
    Pipeline, PipelineConfig, PipelineError, PipelineTrace, Program, SolveLimits, SymbolicResult,
};
pub use template::{build_prompt, Template, TemplateError, TemplateSet};

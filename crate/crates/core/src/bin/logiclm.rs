use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use logiclm::csp::{self, DEFAULT_MAX_SOLUTIONS};
use logiclm::fol::{self, ProverLimits};
use logiclm::lp::{self, LpLimits};
use logiclm::pipeline::eval::{default_trace_dir, run_eval};
use logiclm::pipeline::{
    load_dataset, Backoff, LiveProvider, Pipeline, PipelineConfig, Problem, Provider, RecordingProvider,
    ReplayProvider, ScriptedProvider, TemplateSet,
};
use logiclm::syntax::{parse_csp, parse_fol, parse_lp, print_csp, print_fol, print_lp, ParseErrors};

#[derive(Parser)]
#[command(
    name = "logiclm",
    version,
    about = "Symbolic formulation parsers, solvers and a self-refining solve pipeline"
)]
struct Cli {
    /// Log verbosity: repeat for more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lp,
    Fol,
    Csp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ProviderKind {
    Live,
    Replay,
    Script,
    /// Serve each problem's reference formulation.
    Identity,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formulation and print it in canonical form.
    Parse {
        file: PathBuf,
        #[arg(long)]
        kind: Kind,
        /// Print the parsed structure as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the engine for a formulation and print its verdict.
    Prove {
        file: PathBuf,
        #[arg(long)]
        kind: Kind,
        #[command(flatten)]
        limits: LimitArgs,
        /// Also print a proof tree (lp), refutation (fol) or all solutions (csp).
        #[arg(long)]
        explain: bool,
    },
    /// Run the pipeline on one problem (a JSON record) and print its trace.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the pipeline over a dataset and write a report.
    Eval {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-problem traces (default: <out stem>.traces).
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Save every provider response to a replay fixture.
        #[arg(long)]
        record: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long)]
    max_clauses: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    max_derived_facts: Option<usize>,
    #[arg(long)]
    max_solutions: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "replay")]
    provider: ProviderKind,
    /// Replay fixture or script file.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Pipeline configuration (JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra template directory (<name>.txt files).
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    backoff: Option<Backoff>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    num_examples: Option<usize>,
}

type Res<T> = Result<T, String>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn report_parse_errors(path: &Path, errors: &ParseErrors) -> String {
    let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
    lines.join("\n")
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn parse_cmd(file: &Path, kind: Kind, json: bool) -> Res<()> {
    let text = read(file)?;
    let errs = |e: ParseErrors| report_parse_errors(file, &e);
    let (out, warnings) = match kind {
        Kind::Lp => parse_lp(&text).map(|p| (if json { to_json(&p.value) } else { print_lp(&p.value) }, p.warnings)),
        Kind::Fol => parse_fol(&text).map(|p| (if json { to_json(&p.value) } else { print_fol(&p.value) }, p.warnings)),
        Kind::Csp => parse_csp(&text).map(|p| (if json { to_json(&p.value) } else { print_csp(&p.value) }, p.warnings)),
    }
    .map_err(errs)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", out.trim_end());
    Ok(())
}

fn prove_cmd(file: &Path, kind: Kind, l: &LimitArgs, explain: bool) -> Res<()> {
    let text = read(file)?;
    let errs = |e: ParseErrors| report_parse_errors(file, &e);
    match kind {
        Kind::Lp => {
            let p = parse_lp(&text).map_err(errs)?.value;
            let mut limits = LpLimits::default();
            if let Some(n) = l.max_derived_facts {
                limits.max_derived_facts = n;
            }
            let v = lp::lp_query(&p, &limits).map_err(|e| e.to_string())?;
            println!("{}", v.value);
            for w in &v.warnings {
                eprintln!("warning: {w}");
            }
            if explain {
                let goal = match v.value {
                    logiclm::TruthValue::Disproved => lp::negate_polarity(&p.query).unwrap_or(p.query.clone()),
                    _ => p.query.clone(),
                };
                if let Some(tree) = lp::backward_prove(&p, &goal, &limits).map_err(|e| e.to_string())? {
                    print!("{tree}");
                }
            }
        }
        Kind::Fol => {
            let p = parse_fol(&text).map_err(errs)?.value;
            let d = ProverLimits::default();
            let limits = ProverLimits {
                max_clauses: l.max_clauses.unwrap_or(d.max_clauses),
                max_resolution_steps: l.max_steps.unwrap_or(d.max_resolution_steps),
                max_term_depth: l.max_depth.unwrap_or(d.max_term_depth),
            };
            let r = fol::entailment_report(&p.fact_formulas(), &p.query.formula, &limits).map_err(|e| e.to_string())?;
            println!("{}", r.verdict.value);
            for w in &r.verdict.warnings {
                eprintln!("warning: {w}");
            }
            if explain {
                let side = match r.verdict.value {
                    logiclm::TruthValue::Proved => r.prove.as_ref(),
                    logiclm::TruthValue::Disproved => r.disprove.as_ref(),
                    logiclm::TruthValue::Unknown => None,
                };
                if let Some(d) = side.and_then(|s| s.result.derivation.as_ref()) {
                    print!("{d}");
                }
            }
        }
        Kind::Csp => {
            let m = parse_csp(&text).map_err(errs)?.value;
            let cap = l.max_solutions.unwrap_or(DEFAULT_MAX_SOLUTIONS);
            let all = csp::solve_all(&m, cap).map_err(|e| e.to_string())?;
            println!("{} solution(s)", all.solutions.len());
            if explain {
                for s in &all.solutions {
                    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    println!("  {}", parts.join(" "));
                }
            }
            if !m.options.is_empty() {
                let verdicts = csp::evaluate_options(&m, cap).map_err(|e| e.to_string())?;
                for (l, v) in verdicts {
                    println!("{l}) {v}");
                }
            }
        }
    }
    Ok(())
}

fn load_config(run: &RunArgs) -> Res<PipelineConfig> {
    let mut config: PipelineConfig = match &run.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(n) = run.max_rounds {
        config.max_rounds = n;
    }
    if let Some(b) = run.backoff {
        config.backoff = b;
    }
    if let Some(s) = run.seed {
        config.seed = s;
    }
    if let Some(n) = run.num_examples {
        config.provider.num_examples = n;
    }
    config.provider.validate()?;
    Ok(config)
}

fn load_templates(run: &RunArgs) -> Res<TemplateSet> {
    let mut set = TemplateSet::shipped();
    if let Some(dir) = &run.templates {
        set.load_dir(dir).map_err(|e| e.to_string())?;
    }
    Ok(set)
}

fn make_provider(run: &RunArgs, config: &PipelineConfig, problems: &[Problem]) -> Res<Box<dyn Provider>> {
    let fixture = || {
        run.fixture
            .as_deref()
            .ok_or_else(|| "--fixture is required for this provider".to_string())
    };
    Ok(match run.provider {
        ProviderKind::Live => Box::new(LiveProvider::new(config.provider.clone()).map_err(|e| e.to_string())?),
        ProviderKind::Replay => Box::new(ReplayProvider::load(fixture()?).map_err(|e| e.to_string())?),
        ProviderKind::Script => Box::new(ScriptedProvider::load(fixture()?).map_err(|e| e.to_string())?),
        ProviderKind::Identity => Box::new(ScriptedProvider::identity(problems)),
    })
}

fn solve_cmd(path: &Path, run: &RunArgs) -> Res<()> {
    let text = read(path)?;
    let problem: Problem = serde_json::from_str(text.trim()).map_err(|e| format!("{}: {e}", path.display()))?;
    let config = load_config(run)?;
    let templates = load_templates(run)?;
    let provider = make_provider(run, &config, std::slice::from_ref(&problem))?;
    let trace = Pipeline::new(provider.as_ref(), &templates, &config).solve(&problem);
    println!("{}", to_json(&trace));
    eprintln!("answer: {}", trace.answer());
    Ok(())
}

fn eval_cmd(
    dataset: &Path,
    out: &Path,
    traces: Option<&Path>,
    workers: Option<usize>,
    record: Option<&Path>,
    run: &RunArgs,
) -> Res<()> {
    let problems = load_dataset(dataset).map_err(|e| e.to_string())?;
    let mut config = load_config(run)?;
    if workers.is_some() {
        config.workers = workers;
    }
    let templates = load_templates(run)?;
    let provider = RecordingProvider::new(make_provider(run, &config, &problems)?);
    let trace_dir = traces.map(Path::to_path_buf).unwrap_or_else(|| default_trace_dir(out));
    let pipeline = Pipeline::new(&provider, &templates, &config);
    let report = run_eval(&problems, &pipeline, Some(&trace_dir)).map_err(|e| e.to_string())?;
    std::fs::write(out, report.to_json()).map_err(|e| format!("{}: {e}", out.display()))?;
    if let Some(path) = record {
        provider
            .fixture()
            .save(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let rates: Vec<String> = report.error_rate.iter().map(|r| format!("{r:.3}")).collect();
    eprintln!(
        "{} problem(s), accuracy {:.3}, {} abstention(s), error rate by round [{}]",
        report.overall.total,
        report.overall.accuracy,
        report.overall.abstentions,
        rates.join(", ")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Parse { file, kind, json } => parse_cmd(file, *kind, *json),
        Command::Prove {
            file,
            kind,
            limits,
            explain,
        } => prove_cmd(file, *kind, limits, *explain),
        Command::Solve { problem, run } => solve_cmd(problem, run),
        Command::Eval {
            dataset,
            out,
            traces,
            workers,
            record,
            run,
        } => eval_cmd(dataset, out, traces.as_deref(), *workers, record.as_deref(), run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

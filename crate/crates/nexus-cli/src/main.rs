//! Command-line surface for the join-graph inference pipeline.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for input format errors,
//! 3 for an oracle failure in a context that cannot degrade.

mod http_oracle;

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use http_oracle::HttpOracle;
use nexus_core::analysis::graph_stats;
use nexus_core::eval::EvalResult;
use nexus_core::ingest::{load_ground_truth, load_schema_file};
use nexus_core::model::{build_column_index, JoinGraphMatrix};
use nexus_core::oracle::{MockOracle, SemanticOracle};
use nexus_core::pipeline::{
    run_infer, run_sweep, serialize_report, sweep_csv, RunConfig, SweepConfig,
};
use nexus_core::score::ScorerKind;
use nexus_core::Error;

#[derive(Parser)]
#[command(name = "nexus", version, about = "Join graph inference over schema metadata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer the join graph of a schema catalog.
    Infer(InferArgs),
    /// Print structural statistics of a schema's ground-truth join graph.
    Analyze(AnalyzeArgs),
    /// Score a previously written report against ground truth.
    Eval(EvalArgs),
    /// Run a parameter sweep described by a JSON config, printing CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct InferArgs {
    /// Schema catalog JSON.
    #[arg(long)]
    schema: String,
    /// Query log of already-known joins.
    #[arg(long)]
    query_log: Option<String>,
    /// Ground truth for in-report metrics.
    #[arg(long)]
    truth: Option<String>,
    /// Prior: heuristic | score-file:<path> | llm.
    #[arg(long, default_value = "heuristic")]
    prior: String,
    /// Oracle: mock:<fixture-path> | http.
    #[arg(long)]
    oracle: Option<String>,
    /// Base URL of the HTTP oracle.
    #[arg(long)]
    oracle_url: Option<String>,
    /// Prompt template file forwarded verbatim to the HTTP oracle.
    #[arg(long)]
    prompt_template: Option<String>,
    /// Single solve on the core submatrix, no oracle refinement.
    #[arg(long)]
    fast: bool,
    /// Nuclear-norm weight.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Sparsity weight.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Decision threshold on recovered entries.
    #[arg(long)]
    theta: Option<f64>,
    /// Refinement iteration cap.
    #[arg(long)]
    gamma: Option<usize>,
    /// Promotion threshold of the refinement loop.
    #[arg(long)]
    high_threshold: Option<f64>,
    /// Seed echoed into the report's config block.
    #[arg(long)]
    seed: Option<u64>,
    /// Report output path; stdout when omitted.
    #[arg(long)]
    report: Option<String>,
    /// Solver diagnostics output path.
    #[arg(long)]
    stats: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    truth: String,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    report: String,
    #[arg(long)]
    truth: String,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep description JSON.
    #[arg(long)]
    config: String,
}

enum CliError {
    Usage(String),
    Pipeline(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Pipeline(e)
    }
}

/// Peels stage tags off an error to classify by its root cause.
fn root_cause(err: &Error) -> &Error {
    match err {
        Error::Stage { source, .. } => root_cause(source),
        other => other,
    }
}

fn exit_code(err: &Error) -> u8 {
    match root_cause(err) {
        Error::Oracle(_) | Error::Protocol(_) => 3,
        Error::Range(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests exit cleanly; everything else is a
            // usage error.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Infer(args) => cmd_infer(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Pipeline(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn parse_scorer(spec: &str) -> Result<ScorerKind, CliError> {
    match spec {
        "heuristic" => Ok(ScorerKind::Heuristic),
        "llm" => Ok(ScorerKind::Llm),
        other => match other.strip_prefix("score-file:") {
            Some(path) if !path.is_empty() => Ok(ScorerKind::ScoreFile(path.to_string())),
            _ => Err(CliError::Usage(format!(
                "unknown prior '{spec}' (expected heuristic, score-file:<path>, or llm)"
            ))),
        },
    }
}

fn build_oracle(
    spec: Option<&str>,
    url: Option<&str>,
    prompt_template: Option<&str>,
) -> Result<Option<Box<dyn SemanticOracle>>, CliError> {
    let Some(spec) = spec else { return Ok(None) };
    if let Some(path) = spec.strip_prefix("mock:") {
        if path.is_empty() {
            return Err(CliError::Usage("mock oracle requires a fixture path".into()));
        }
        return Ok(Some(Box::new(MockOracle::from_file(path)?)));
    }
    if spec == "http" {
        let Some(url) = url else {
            return Err(CliError::Usage("--oracle http requires --oracle-url".into()));
        };
        let template = prompt_template
            .map(std::fs::read_to_string)
            .transpose()
            .map_err(|e| CliError::Pipeline(Error::Io(e)))?;
        let token = std::env::var("NEXUS_ORACLE_TOKEN").ok();
        return Ok(Some(Box::new(HttpOracle::new(url, token, template))));
    }
    Err(CliError::Usage(format!(
        "unknown oracle '{spec}' (expected mock:<fixture-path> or http)"
    )))
}

fn cmd_infer(args: InferArgs) -> Result<(), CliError> {
    let scorer = parse_scorer(&args.prior)?;
    let oracle = build_oracle(
        args.oracle.as_deref(),
        args.oracle_url.as_deref(),
        args.prompt_template.as_deref(),
    )?;

    let mut cfg = RunConfig::new(args.schema);
    cfg.query_log_path = args.query_log;
    cfg.truth_path = args.truth;
    cfg.scorer = scorer;
    cfg.oracle = args.oracle;
    cfg.fast = args.fast;
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.lambda1 {
        cfg.solver.lambda1 = v;
    }
    if let Some(v) = args.lambda2 {
        cfg.solver.lambda2 = v;
    }
    if let Some(v) = args.theta {
        cfg.solver.theta = v;
    }
    if let Some(v) = args.gamma {
        cfg.em.gamma = v;
    }
    if let Some(v) = args.high_threshold {
        cfg.em.high_threshold = v;
    }

    let needs_oracle =
        matches!(cfg.scorer, ScorerKind::Llm) || (!cfg.fast && cfg.em.gamma > 1);
    if needs_oracle && oracle.is_none() {
        return Err(CliError::Usage(
            "this run consults the oracle (llm prior, or refinement without --fast); \
             pass --oracle mock:<path> or --oracle http"
                .into(),
        ));
    }

    let (report, outcome) = run_infer(&cfg, oracle.as_deref())?;
    let serialized = serialize_report(&report)?;
    match &args.report {
        Some(path) => std::fs::write(path, serialized).map_err(Error::Io)?,
        None => print!("{serialized}"),
    }
    if let Some(path) = &args.stats {
        let stats = serde_json::to_string_pretty(&outcome.trace.solve_stats)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        std::fs::write(path, stats + "\n").map_err(Error::Io)?;
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let columns = load_schema_file(&args.schema)?;
    let index = build_column_index(&columns)?;
    let (truth, _) = load_ground_truth(&args.truth, &index)?;
    let adjacency =
        JoinGraphMatrix::from_edges(index.n(), &truth.edges.iter().copied().collect::<Vec<_>>());
    let stats = graph_stats(&adjacency, index.table_count())?;
    let rendered = serde_json::to_string_pretty(&stats)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    println!("{rendered}");
    Ok(())
}

/// Name pair normalized so edge orientation does not matter.
fn name_key(left: &str, right: &str) -> (String, String) {
    if left <= right {
        (left.to_string(), right.to_string())
    } else {
        (right.to_string(), left.to_string())
    }
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    #[derive(Deserialize)]
    struct NamedEdge {
        left: String,
        right: String,
    }
    #[derive(Deserialize)]
    struct ReportDoc {
        edges: Vec<NamedEdge>,
    }

    let report_text = std::fs::read_to_string(&args.report).map_err(Error::Io)?;
    let report: ReportDoc = serde_json::from_str(&report_text).map_err(|e| {
        Error::Format { path: args.report.clone(), detail: e.to_string() }
    })?;
    let truth_text = std::fs::read_to_string(&args.truth).map_err(Error::Io)?;
    let truth: Vec<NamedEdge> = serde_json::from_str(&truth_text).map_err(|e| {
        Error::Format { path: args.truth.clone(), detail: e.to_string() }
    })?;

    let predicted: BTreeSet<(String, String)> =
        report.edges.iter().map(|e| name_key(&e.left, &e.right)).collect();
    let actual: BTreeSet<(String, String)> =
        truth.iter().map(|e| name_key(&e.left, &e.right)).collect();
    let tp = predicted.intersection(&actual).count();
    let result = EvalResult::from_counts(tp, predicted.len() - tp, actual.len() - tp);
    let rendered = serde_json::to_string_pretty(&result)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    println!("{rendered}");
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(Error::Io)?;
    let cfg: SweepConfig = serde_json::from_str(&text).map_err(|e| {
        Error::Format { path: args.config.clone(), detail: e.to_string() }
    })?;
    let oracle = match cfg.oracle.as_deref() {
        Some(spec) if spec.starts_with("mock:") => build_oracle(Some(spec), None, None)?,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "sweep oracles must be mock fixtures, got '{other}'"
            )))
        }
        None => None,
    };
    let rows = run_sweep(&cfg, oracle.as_deref())?;
    print!("{}", sweep_csv(&rows)?);
    Ok(())
}

//! End-to-end orchestration: ingest → prune → score → complete (optionally
//! EM-refined) → threshold, plus grid sweeps over the solver and refinement
//! hyperparameters. Reports are deterministic: identical configs, inputs,
//! and mock oracles serialize byte-identically.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::em::{em_infer, EmConfig, EmTrace};
use crate::error::Error;
use crate::eval::{evaluate, EvalResult};
use crate::ingest::{
    load_ground_truth, load_query_log, load_schema_file, sample_known_joins, QueryLogJoin,
};
use crate::lrmc::{threshold_decisions, SolverConfig};
use crate::model::{
    build_column_index, ColumnIndex, ColumnMeta, Direction, JoinGraphMatrix, LatentMatrix,
};
use crate::oracle::{ColumnRef, JoinPrediction, SemanticOracle, TypedColumn};
use crate::prune::{build_initial_mask, filter_joinable_columns, prune_pairs, PruneReport};
use crate::score::{
    compute_pair_features, fill_probability_matrix, heuristic_score, llm_score_batch,
    load_score_file, ScorerKind,
};

/// Everything one inference run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_path: String,
    #[serde(default)]
    pub query_log_path: Option<String>,
    #[serde(default)]
    pub truth_path: Option<String>,
    #[serde(default = "default_scorer")]
    pub scorer: ScorerKind,
    /// Echo of the oracle selection ("mock:<path>" or "http"), if any.
    #[serde(default)]
    pub oracle: Option<String>,
    /// Single solve on the core submatrix, no oracle refinement.
    #[serde(default)]
    pub fast: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub em: EmConfig,
}

fn default_scorer() -> ScorerKind {
    ScorerKind::Heuristic
}

impl RunConfig {
    pub fn new(schema_path: impl Into<String>) -> Self {
        RunConfig {
            schema_path: schema_path.into(),
            query_log_path: None,
            truth_path: None,
            scorer: ScorerKind::Heuristic,
            oracle: None,
            fast: false,
            seed: 0,
            solver: SolverConfig::default(),
            em: EmConfig::default(),
        }
    }
}

/// Where the survivor scores come from.
pub enum Prior<'a> {
    /// Name/type features of the columns themselves.
    Heuristic,
    /// Externally produced scores keyed by normalized index pair.
    Provided(&'a BTreeMap<(usize, usize), f64>),
    /// Join predictions from the semantic oracle.
    Oracle,
}

/// Placeholder oracle for runs that must never consult one.
struct NoOracle;

impl SemanticOracle for NoOracle {
    fn annotate(&self, _: &[ColumnRef]) -> Result<Vec<String>, Error> {
        Err(Error::Oracle("no oracle configured".into()))
    }
    fn soft_match(&self, _: &TypedColumn, _: &TypedColumn) -> Result<bool, Error> {
        Err(Error::Oracle("no oracle configured".into()))
    }
    fn predict_joins(&self, _: &[(ColumnRef, ColumnRef)]) -> Result<Vec<JoinPrediction>, Error> {
        Err(Error::Oracle("no oracle configured".into()))
    }
}

/// In-memory result of one inference run.
#[derive(Debug)]
pub struct GraphOutcome {
    pub index: ColumnIndex,
    pub prune: PruneReport,
    pub latent: LatentMatrix,
    pub trace: EmTrace,
    pub decided: JoinGraphMatrix,
}

/// Runs the inference pipeline over in-memory columns: prune the candidate
/// pairs, score the survivors, complete the matrix (fast: one solve on the
/// core submatrix; otherwise the full EM loop), and threshold decisions.
pub fn infer_graph(
    columns: &[ColumnMeta],
    known: &[QueryLogJoin],
    prior: Prior<'_>,
    solver: &SolverConfig,
    em: &EmConfig,
    fast: bool,
    oracle: Option<&dyn SemanticOracle>,
) -> Result<GraphOutcome, Error> {
    solver.validate()?;
    em.validate()?;
    let needs_oracle = matches!(prior, Prior::Oracle) || (!fast && em.gamma > 1);
    if needs_oracle && oracle.is_none() {
        return Err(Error::Oracle(
            "an oracle is required for EM refinement or the llm prior".into(),
        ));
    }

    let index = build_column_index(columns).map_err(|e| e.in_stage("ingestion"))?;
    let n = columns.len();

    let eligible = filter_joinable_columns(columns);
    let prune = prune_pairs(columns, &eligible);
    let skeleton = build_initial_mask(n, &prune.survivors, known)
        .map_err(|e| e.in_stage("pruning"))?;

    // Query-log pins win over prior scores: only still-latent survivors get
    // scored.
    let latent_pairs: Vec<(usize, usize)> = prune
        .survivors
        .iter()
        .map(|p| (p.i, p.j))
        .filter(|&(i, j)| !skeleton.mask.is_observed(i, j))
        .collect();
    let scores: BTreeMap<(usize, usize), f64> = match prior {
        Prior::Heuristic => latent_pairs
            .iter()
            .map(|&(i, j)| {
                ((i, j), heuristic_score(&compute_pair_features(&columns[i], &columns[j])))
            })
            .collect(),
        Prior::Provided(map) => latent_pairs
            .iter()
            .filter_map(|key| map.get(key).map(|&v| (*key, v)))
            .collect(),
        Prior::Oracle => {
            let oracle = oracle.expect("checked above");
            llm_score_batch(&latent_pairs, &index, oracle, em.oracle_batch_size)
                .map_err(|e| e.in_stage("scoring"))?
        }
    };
    let s0 =
        fill_probability_matrix(&skeleton, &scores).map_err(|e| e.in_stage("scoring"))?;

    let (solver_eff, em_eff) = if fast {
        (SolverConfig { use_core_submatrix: true, ..*solver }, EmConfig { gamma: 1, ..*em })
    } else {
        (*solver, *em)
    };
    let (latent, trace) = em_infer(&s0, &em_eff, &solver_eff, &index, oracle.unwrap_or(&NoOracle))
        .map_err(|e| e.in_stage("completion"))?;
    let decided = threshold_decisions(&latent, &s0.mask, solver.theta)
        .map_err(|e| e.in_stage("threshold"))?;

    Ok(GraphOutcome { index, prune, latent, trace, decided })
}

/// How a positive edge entered the report. Exactly one tag per edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    QueryLog,
    PromotedByEm,
    Completion,
}

/// One positive edge of the inferred join graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEdge {
    pub left: String,
    pub right: String,
    pub probability: f64,
    pub direction: Direction,
    pub provenance: Provenance,
}

/// Pruning counters without the survivor list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruneCounts {
    pub total_columns: usize,
    pub columns_dropped_by_type: usize,
    pub enumerated_pairs: usize,
    pub dropped_same_table: usize,
    pub dropped_type_incompatible: usize,
    pub dropped_uniqueness: usize,
    pub dropped_cardinality: usize,
    pub dropped_domain: usize,
    pub survivor_count: usize,
}

impl From<&PruneReport> for PruneCounts {
    fn from(r: &PruneReport) -> Self {
        PruneCounts {
            total_columns: r.total_columns,
            columns_dropped_by_type: r.columns_dropped_by_type,
            enumerated_pairs: r.enumerated_pairs,
            dropped_same_table: r.dropped_same_table,
            dropped_type_incompatible: r.dropped_type_incompatible,
            dropped_uniqueness: r.dropped_uniqueness,
            dropped_cardinality: r.dropped_cardinality,
            dropped_domain: r.dropped_domain,
            survivor_count: r.survivors.len(),
        }
    }
}

/// The full inference report: config echo, pruning counters, the refinement
/// trace, the inferred edges, and metrics when ground truth was supplied.
#[derive(Debug, Clone, Serialize)]
pub struct JoinGraphReport {
    pub config: RunConfig,
    pub n_columns: usize,
    pub table_count: usize,
    pub pruning: PruneCounts,
    pub em: EmTrace,
    pub degraded: bool,
    pub edges: Vec<ReportEdge>,
    pub metrics: Option<EvalResult>,
}

/// Stable serialization of a report: pretty JSON with fixed key order.
pub fn serialize_report(report: &JoinGraphReport) -> Result<String, Error> {
    let mut out = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

fn build_report(
    config: RunConfig,
    outcome: &GraphOutcome,
    known: &[QueryLogJoin],
    metrics: Option<EvalResult>,
) -> JoinGraphReport {
    let known_set: BTreeSet<(usize, usize)> =
        known.iter().map(|e| (e.i.min(e.j), e.i.max(e.j))).collect();
    let promoted_set: BTreeSet<(usize, usize)> = outcome.trace.promoted.iter().copied().collect();
    let directions: BTreeMap<(usize, usize), Direction> =
        outcome.prune.survivors.iter().map(|p| ((p.i, p.j), p.direction)).collect();

    let mut edges: Vec<ReportEdge> = outcome
        .decided
        .edges()
        .into_iter()
        .map(|(i, j)| ReportEdge {
            left: outcome.index.qualified(i),
            right: outcome.index.qualified(j),
            probability: outcome.latent.matrix.get(i, j),
            direction: directions.get(&(i, j)).copied().unwrap_or(Direction::Unknown),
            provenance: if known_set.contains(&(i, j)) {
                Provenance::QueryLog
            } else if promoted_set.contains(&(i, j)) {
                Provenance::PromotedByEm
            } else {
                Provenance::Completion
            },
        })
        .collect();
    edges.sort_by(|a, b| (&a.left, &a.right).cmp(&(&b.left, &b.right)));

    JoinGraphReport {
        n_columns: outcome.index.n(),
        table_count: outcome.index.table_count(),
        pruning: PruneCounts::from(&outcome.prune),
        em: outcome.trace.clone(),
        degraded: outcome.trace.degraded,
        edges,
        metrics,
        config,
    }
}

/// Runs the full pipeline from files per `cfg`. The returned outcome carries
/// the in-memory matrices and per-solve diagnostics alongside the report.
pub fn run_infer(
    cfg: &RunConfig,
    oracle: Option<&dyn SemanticOracle>,
) -> Result<(JoinGraphReport, GraphOutcome), Error> {
    let columns = load_schema_file(&cfg.schema_path).map_err(|e| e.in_stage("ingestion"))?;
    let index = build_column_index(&columns).map_err(|e| e.in_stage("ingestion"))?;

    let known = match &cfg.query_log_path {
        Some(path) => load_query_log(path, &index).map_err(|e| e.in_stage("ingestion"))?.0,
        None => Vec::new(),
    };
    let truth = match &cfg.truth_path {
        Some(path) => {
            Some(load_ground_truth(path, &index).map_err(|e| e.in_stage("ingestion"))?.0)
        }
        None => None,
    };

    // The score-file prior needs the survivor list before the pipeline runs.
    let file_scores: Option<BTreeMap<(usize, usize), f64>> = match &cfg.scorer {
        ScorerKind::ScoreFile(path) => {
            let eligible = filter_joinable_columns(&columns);
            let survivors: Vec<(usize, usize)> =
                prune_pairs(&columns, &eligible).survivors.iter().map(|p| (p.i, p.j)).collect();
            Some(
                load_score_file(path, &survivors, &index)
                    .map_err(|e| e.in_stage("scoring"))?
                    .0,
            )
        }
        _ => None,
    };
    let prior = match (&cfg.scorer, &file_scores) {
        (ScorerKind::Heuristic, _) => Prior::Heuristic,
        (ScorerKind::ScoreFile(_), Some(map)) => Prior::Provided(map),
        (ScorerKind::ScoreFile(_), None) => unreachable!("loaded above"),
        (ScorerKind::Llm, _) => Prior::Oracle,
    };

    let outcome =
        infer_graph(&columns, &known, prior, &cfg.solver, &cfg.em, cfg.fast, oracle)?;
    let metrics = truth
        .as_ref()
        .map(|t| evaluate(&outcome.decided, t))
        .transpose()
        .map_err(|e| e.in_stage("evaluation"))?;
    let report = build_report(cfg.clone(), &outcome, &known, metrics);
    Ok((report, outcome))
}

/// Axes of a hyperparameter sweep. Empty axes fall back to the base config's
/// single value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    #[serde(default)]
    pub lambda1: Vec<f64>,
    #[serde(default)]
    pub lambda2: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub high_threshold: Vec<f64>,
    /// Fraction of ground-truth edges revealed as query-log joins.
    #[serde(default)]
    pub known_fraction: Vec<f64>,
}

/// Sweep setup: fixed inputs and base config plus the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_path: String,
    pub truth_path: String,
    #[serde(default)]
    pub oracle: Option<String>,
    #[serde(default = "default_scorer")]
    pub scorer: ScorerKind,
    #[serde(default)]
    pub fast: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub em: EmConfig,
    #[serde(default)]
    pub grid: SweepGrid,
}

/// One grid point's outcome. Metrics are absent when the point failed.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub grid_index: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
    pub high_threshold: f64,
    pub known_fraction: f64,
    pub true_positives: Option<usize>,
    pub false_positives: Option<usize>,
    pub false_negatives: Option<usize>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub error: Option<String>,
}

fn axis(values: &[f64], base: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

/// Runs every grid point against the fixed schema and ground truth. Points
/// run in a worker pool; rows come back in grid order, and a failing point
/// records its error in-row instead of aborting the sweep.
pub fn run_sweep(
    cfg: &SweepConfig,
    oracle: Option<&dyn SemanticOracle>,
) -> Result<Vec<SweepRow>, Error> {
    let columns = load_schema_file(&cfg.schema_path).map_err(|e| e.in_stage("ingestion"))?;
    let index = build_column_index(&columns).map_err(|e| e.in_stage("ingestion"))?;
    let (truth, _) =
        load_ground_truth(&cfg.truth_path, &index).map_err(|e| e.in_stage("ingestion"))?;

    // Scores depend only on the survivors, not on the grid: resolve once.
    let eligible = filter_joinable_columns(&columns);
    let survivors: Vec<(usize, usize)> =
        prune_pairs(&columns, &eligible).survivors.iter().map(|p| (p.i, p.j)).collect();
    let scores: BTreeMap<(usize, usize), f64> = match &cfg.scorer {
        ScorerKind::Heuristic => survivors
            .iter()
            .map(|&(i, j)| {
                ((i, j), heuristic_score(&compute_pair_features(&columns[i], &columns[j])))
            })
            .collect(),
        ScorerKind::ScoreFile(path) => {
            load_score_file(path, &survivors, &index).map_err(|e| e.in_stage("scoring"))?.0
        }
        ScorerKind::Llm => {
            let oracle = oracle.ok_or_else(|| {
                Error::Oracle("an oracle is required for the llm prior".into())
            })?;
            llm_score_batch(&survivors, &index, oracle, cfg.em.oracle_batch_size)
                .map_err(|e| e.in_stage("scoring"))?
        }
    };

    let mut points = Vec::new();
    for &l1 in &axis(&cfg.grid.lambda1, cfg.solver.lambda1) {
        for &l2 in &axis(&cfg.grid.lambda2, cfg.solver.lambda2) {
            for &theta in &axis(&cfg.grid.theta, cfg.solver.theta) {
                for &high in &axis(&cfg.grid.high_threshold, cfg.em.high_threshold) {
                    for &fraction in &axis(&cfg.grid.known_fraction, 0.0) {
                        points.push((l1, l2, theta, high, fraction));
                    }
                }
            }
        }
    }

    let rows: Vec<SweepRow> = points
        .par_iter()
        .enumerate()
        .map(|(grid_index, &(lambda1, lambda2, theta, high_threshold, known_fraction))| {
            let mut row = SweepRow {
                grid_index,
                lambda1,
                lambda2,
                theta,
                high_threshold,
                known_fraction,
                true_positives: None,
                false_positives: None,
                false_negatives: None,
                precision: None,
                recall: None,
                f1: None,
                error: None,
            };
            let solver = SolverConfig { lambda1, lambda2, theta, ..cfg.solver };
            let em = EmConfig { high_threshold, ..cfg.em };
            let point = sample_known_joins(&truth, known_fraction, cfg.seed)
                .and_then(|known| {
                    infer_graph(
                        &columns,
                        &known,
                        Prior::Provided(&scores),
                        &solver,
                        &em,
                        cfg.fast,
                        oracle,
                    )
                })
                .and_then(|outcome| evaluate(&outcome.decided, &truth));
            match point {
                Ok(metrics) => {
                    row.true_positives = Some(metrics.true_positives);
                    row.false_positives = Some(metrics.false_positives);
                    row.false_negatives = Some(metrics.false_negatives);
                    row.precision = Some(metrics.precision);
                    row.recall = Some(metrics.recall);
                    row.f1 = Some(metrics.f1);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Serializes sweep rows as CSV with a header line.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    let bytes =
        writer.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

//! Iterative EM refinement: alternate matrix completion (E-step) with
//! oracle-guided probability updates (M-step). Candidates whose entity types
//! agree get boosted and eventually promoted to certain entries; mismatched
//! candidates decay geometrically. The certain set Ω only ever grows.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lrmc::{solve, SolveStats, SolverConfig};
use crate::model::{ColumnIndex, LatentMatrix, ProbabilityMatrix};
use crate::oracle::{
    normalize_entity_type, ColumnRef, SemanticOracle, TypedColumn, UNKNOWN_ENTITY_TYPE,
};

/// Hyperparameters of the refinement loop and the probability update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    /// Maximum EM iterations Γ.
    pub gamma: usize,
    /// Convergence tolerance ε on the Frobenius change between E-steps.
    pub epsilon: f64,
    /// Candidates below this probability are not checked against the oracle.
    pub low_threshold: f64,
    /// Compatible candidates at or above this are promoted to certainty;
    /// compatible candidates below it are raised to exactly this value.
    pub high_threshold: f64,
    /// Mismatch penalty δ: an incompatible candidate's probability is
    /// multiplied by this each iteration.
    pub delta: f64,
    pub oracle_batch_size: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            gamma: 5,
            epsilon: 1e-5,
            low_threshold: 0.5,
            high_threshold: 0.8,
            delta: 0.5,
            oracle_batch_size: 24,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.gamma == 0 {
            return Err(Error::Range("gamma must be positive".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Range("epsilon must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.low_threshold)
            || !(0.0..=1.0).contains(&self.high_threshold)
            || self.low_threshold > self.high_threshold
        {
            return Err(Error::Range(
                "thresholds must satisfy 0 <= low <= high <= 1".into(),
            ));
        }
        if !(0.0 < self.delta && self.delta < 1.0) {
            return Err(Error::Range(format!("delta {} outside (0,1)", self.delta)));
        }
        if self.oracle_batch_size == 0 {
            return Err(Error::Range("oracle_batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Column-index → entity-type map. Entries are write-once: annotations are
/// fetched at most once per column per run.
#[derive(Debug, Clone, Default)]
pub struct EntityTypeCache {
    types: BTreeMap<usize, String>,
}

impl EntityTypeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, column: usize) -> Option<&str> {
        self.types.get(&column).map(String::as_str)
    }

    pub fn insert_if_absent(&mut self, column: usize, entity_type: String) {
        self.types.entry(column).or_insert(entity_type);
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// Memo of soft-match verdicts keyed by the normalized type-string pair, so
/// repeated checks of the same two types cost one oracle call per run.
#[derive(Debug, Default)]
pub struct MatchMemo {
    verdicts: Mutex<BTreeMap<(String, String), bool>>,
}

impl MatchMemo {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Asks the oracle whether two entity types match semantically, consulting
/// the memo first. Callers short-circuit exact equality before calling this.
pub fn soft_type_match(
    a: &TypedColumn,
    b: &TypedColumn,
    oracle: &dyn SemanticOracle,
    memo: &MatchMemo,
) -> Result<bool, Error> {
    let (x, y) = (normalize_entity_type(&a.entity_type), normalize_entity_type(&b.entity_type));
    let key = if x <= y { (x, y) } else { (y, x) };
    if let Some(&verdict) = memo.verdicts.lock().expect("memo lock").get(&key) {
        return Ok(verdict);
    }
    let verdict = oracle.soft_match(a, b)?;
    memo.verdicts.lock().expect("memo lock").insert(key, verdict);
    Ok(verdict)
}

/// Outcome counters of one annotation pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AnnotateStats {
    pub requests: usize,
    pub failed_batches: usize,
}

/// Fetches entity types for the uncached columns among `columns`, batched at
/// `batch_size` per request. Empty or whitespace annotations become the
/// `unknown` sentinel; a failed batch leaves its columns uncached so a later
/// iteration can retry.
pub fn annotate_entity_types(
    columns: &[usize],
    index: &ColumnIndex,
    oracle: &dyn SemanticOracle,
    cache: &mut EntityTypeCache,
    batch_size: usize,
) -> AnnotateStats {
    let pending: Vec<usize> = {
        let mut seen = BTreeSet::new();
        columns
            .iter()
            .copied()
            .filter(|&c| cache.get(c).is_none() && seen.insert(c))
            .collect()
    };
    let batches: Vec<Vec<ColumnRef>> = pending
        .chunks(batch_size.max(1))
        .map(|chunk| {
            chunk
                .iter()
                .map(|&c| {
                    let (t, col) = index.name(c);
                    ColumnRef::new(t.clone(), col.clone())
                })
                .collect()
        })
        .collect();
    let batch_refs: Vec<&[ColumnRef]> = batches.iter().map(Vec::as_slice).collect();
    let results = oracle.annotate_many(&batch_refs);

    let mut stats = AnnotateStats { requests: batches.len(), failed_batches: 0 };
    for (chunk, result) in pending.chunks(batch_size.max(1)).zip(results) {
        match result {
            Ok(types) if types.len() == chunk.len() => {
                for (&c, t) in chunk.iter().zip(types) {
                    let t = t.trim();
                    let entity = if t.is_empty() {
                        UNKNOWN_ENTITY_TYPE.to_string()
                    } else {
                        t.to_string()
                    };
                    cache.insert_if_absent(c, entity);
                }
            }
            _ => stats.failed_batches += 1,
        }
    }
    stats
}

/// Counters and deltas for one M-step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MStepStats {
    pub candidates_gated: usize,
    pub promotions: usize,
    pub boosts: usize,
    pub decays: usize,
    pub skipped_unannotated: usize,
    pub annotate_requests: usize,
    pub failed_batches: usize,
    pub match_failures: usize,
}

/// One M-step: for every latent candidate whose current probability — the
/// larger of its stored score and its recovered latent value — reaches
/// `low_threshold`, fetch both entity types (cache-first) and compare them.
/// Exact normalized equality, or an oracle soft match, counts as compatible.
/// Compatible candidates at `high_threshold` or above become certain ones;
/// compatible candidates below it are raised to `high_threshold`;
/// incompatible candidates decay by δ. Gated pairs with an unannotated
/// endpoint (failed batch) are left untouched for this iteration.
pub fn update_prob_matrix(
    m: &LatentMatrix,
    s: &ProbabilityMatrix,
    cache: &mut EntityTypeCache,
    cfg: &EmConfig,
    index: &ColumnIndex,
    oracle: &dyn SemanticOracle,
    memo: &MatchMemo,
) -> Result<(ProbabilityMatrix, Vec<(usize, usize)>, MStepStats), Error> {
    let mut next = s.clone();
    let mut stats = MStepStats::default();
    let mut promoted = Vec::new();

    let gated: Vec<(usize, usize)> = s
        .mask
        .unobserved_upper_pairs()
        .into_iter()
        .filter(|&(i, j)| s.matrix.get(i, j).max(m.matrix.get(i, j)) >= cfg.low_threshold)
        .collect();
    stats.candidates_gated = gated.len();

    let endpoints: Vec<usize> = gated.iter().flat_map(|&(i, j)| [i, j]).collect();
    let annotate = annotate_entity_types(&endpoints, index, oracle, cache, cfg.oracle_batch_size);
    stats.annotate_requests = annotate.requests;
    stats.failed_batches = annotate.failed_batches;

    for (i, j) in gated {
        let (Some(type_i), Some(type_j)) = (cache.get(i), cache.get(j)) else {
            stats.skipped_unannotated += 1;
            continue;
        };
        let compatible = if normalize_entity_type(type_i) == normalize_entity_type(type_j) {
            true
        } else if type_i == UNKNOWN_ENTITY_TYPE || type_j == UNKNOWN_ENTITY_TYPE {
            // A failed annotation matches nothing but itself.
            false
        } else {
            let (ti, ci) = index.name(i);
            let (tj, cj) = index.name(j);
            let a = TypedColumn {
                table: ti.clone(),
                column: ci.clone(),
                entity_type: type_i.to_string(),
            };
            let b = TypedColumn {
                table: tj.clone(),
                column: cj.clone(),
                entity_type: type_j.to_string(),
            };
            match soft_type_match(&a, &b, oracle, memo) {
                Ok(verdict) => verdict,
                Err(_) => {
                    // Transient failure reads as no-match for this iteration.
                    stats.match_failures += 1;
                    false
                }
            }
        };

        let current = next.matrix.get(i, j);
        if compatible {
            if current >= cfg.high_threshold {
                next.matrix.set_sym(i, j, 1.0);
                next.mask.observe(i, j);
                promoted.push((i, j));
                stats.promotions += 1;
            } else {
                next.matrix.set_sym(i, j, cfg.high_threshold);
                stats.boosts += 1;
            }
        } else {
            next.matrix.set_sym(i, j, current * cfg.delta);
            stats.decays += 1;
        }
    }
    Ok((next, promoted, stats))
}

/// Why the EM loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    Converged,
    NoCandidatesLeft,
    IterationLimit,
    Degraded,
}

/// Per-iteration record of the refinement loop.
#[derive(Debug, Clone, Serialize)]
pub struct EmIteration {
    pub t: usize,
    pub solve_iterations: usize,
    pub solve_objective: f64,
    /// ‖M⁽ᵗ⁾ − M⁽ᵗ⁻¹⁾‖_F; absent for the first iteration.
    pub frobenius_delta: Option<f64>,
    pub omega_size: usize,
    pub candidates_remaining: usize,
    #[serde(flatten)]
    pub m_step: MStepStats,
}

/// Full trace of one `em_infer` run.
#[derive(Debug, Clone, Serialize)]
pub struct EmTrace {
    pub iterations: Vec<EmIteration>,
    pub exit: ExitReason,
    pub degraded: bool,
    /// Latent pairs promoted to certainty, in promotion order.
    pub promoted: Vec<(usize, usize)>,
    /// Raw per-solve diagnostics. Skipped when serializing: they carry wall
    /// times, and reports must be byte-identical across identical runs.
    #[serde(skip)]
    pub solve_stats: Vec<SolveStats>,
}

/// Runs the EM loop: solve, test for convergence (only after the first
/// iteration), stop when no latent candidates remain or the iteration budget
/// is reached, otherwise update the probability matrix and repeat. On a hard
/// oracle failure (an M-step where every batch failed and nothing could be
/// evaluated) the loop aborts, returning the last completed E-step flagged
/// as degraded.
pub fn em_infer(
    s0: &ProbabilityMatrix,
    cfg: &EmConfig,
    solver_cfg: &SolverConfig,
    index: &ColumnIndex,
    oracle: &dyn SemanticOracle,
) -> Result<(LatentMatrix, EmTrace), Error> {
    cfg.validate()?;
    solver_cfg.validate()?;

    let mut s = s0.clone();
    let mut cache = EntityTypeCache::new();
    let memo = MatchMemo::new();
    let mut trace = EmTrace {
        iterations: Vec::new(),
        exit: ExitReason::IterationLimit,
        degraded: false,
        promoted: Vec::new(),
        solve_stats: Vec::new(),
    };
    let mut m_prev: Option<LatentMatrix> = None;

    for t in 0..cfg.gamma {
        let (m, solve_stats): (LatentMatrix, SolveStats) = solve(&s, solver_cfg)?;
        let delta = m_prev.as_ref().map(|p| m.matrix.frobenius_distance(&p.matrix));
        let mut record = EmIteration {
            t,
            solve_iterations: solve_stats.iterations,
            solve_objective: solve_stats.objective,
            frobenius_delta: delta,
            omega_size: s.mask.observed_count(),
            candidates_remaining: s.mask.unobserved_count() / 2,
            m_step: MStepStats::default(),
        };
        trace.solve_stats.push(solve_stats);

        if let Some(delta) = delta {
            if delta <= cfg.epsilon {
                trace.iterations.push(record);
                trace.exit = ExitReason::Converged;
                return Ok((m, trace));
            }
        }
        if s.mask.unobserved_count() == 0 {
            trace.iterations.push(record);
            trace.exit = ExitReason::NoCandidatesLeft;
            return Ok((m, trace));
        }
        if t + 1 == cfg.gamma {
            trace.iterations.push(record);
            trace.exit = ExitReason::IterationLimit;
            return Ok((m, trace));
        }

        let (next, promoted, m_step) =
            update_prob_matrix(&m, &s, &mut cache, cfg, index, oracle, &memo)?;
        record.m_step = m_step;
        trace.iterations.push(record);
        trace.promoted.extend(promoted);

        let hard_failure = m_step.failed_batches > 0
            && m_step.candidates_gated > 0
            && m_step.skipped_unannotated == m_step.candidates_gated;
        if hard_failure {
            trace.exit = ExitReason::Degraded;
            trace.degraded = true;
            return Ok((m, trace));
        }

        s = next;
        m_prev = Some(m);
    }
    unreachable!("the iteration-limit branch returns before the loop ends");
}

//! Structural statistics of join-graph matrices: density, numerical rank,
//! and per-collection summaries with CDF samples for plotting.

use serde::Serialize;

use crate::error::Error;
use crate::matrix::Dense;
use crate::model::JoinGraphMatrix;

/// Default number of evenly spaced CDF sample thresholds on [0, 1].
pub const DEFAULT_CDF_GRID_POINTS: usize = 200;

/// Structural statistics of one schema's join graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    /// Nonzero count over the full matrix (each undirected edge counts twice).
    pub nnz: usize,
    pub density: f64,
    pub rank: usize,
    pub normalized_rank: f64,
    pub table_count: usize,
    pub avg_columns_per_table: f64,
}

/// Fraction of nonzero entries: nnz(A)/n², both symmetric orientations.
pub fn compute_density(a: &JoinGraphMatrix) -> Result<f64, Error> {
    let n = a.matrix.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(a.matrix.nnz(0.0) as f64 / (n * n) as f64)
}

/// Numerical rank over the reals: singular values above n·ε·σ_max.
pub fn matrix_rank(m: &Dense) -> Result<usize, Error> {
    let n = m.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let sv = m.to_nalgebra().singular_values();
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = n as f64 * f64::EPSILON * sigma_max;
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// rank(A)/n with the numerical-rank cutoff of [`matrix_rank`].
pub fn compute_normalized_rank(a: &JoinGraphMatrix) -> Result<f64, Error> {
    let n = a.matrix.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(matrix_rank(&a.matrix)? as f64 / n as f64)
}

/// All structural statistics of one join graph in a single record.
pub fn graph_stats(a: &JoinGraphMatrix, table_count: usize) -> Result<GraphStats, Error> {
    let n = a.matrix.n();
    let density = compute_density(a)?;
    let rank = matrix_rank(&a.matrix)?;
    Ok(GraphStats {
        n,
        nnz: a.matrix.nnz(0.0),
        density,
        rank,
        normalized_rank: rank as f64 / n as f64,
        table_count,
        avg_columns_per_table: if table_count == 0 {
            0.0
        } else {
            n as f64 / table_count as f64
        },
    })
}

/// min/max/mean/median of one statistic over a collection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

fn summarize_field(values: &[f64]) -> FieldSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    FieldSummary {
        min: sorted[0],
        max: *sorted.last().expect("non-empty"),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        median,
    }
}

/// One CDF sample: the fraction of schemas with value ≤ `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub threshold: f64,
    pub fraction: f64,
}

fn sample_cdf(values: &[f64], grid_points: usize) -> Vec<CdfPoint> {
    let n = values.len() as f64;
    (0..grid_points)
        .map(|k| {
            let threshold = if grid_points == 1 {
                1.0
            } else {
                k as f64 / (grid_points - 1) as f64
            };
            let below = values.iter().filter(|&&v| v <= threshold).count();
            CdfPoint { threshold, fraction: below as f64 / n }
        })
        .collect()
}

/// Collection-level summary: field statistics plus CDF samples of density
/// and normalized rank on an even grid over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollectionSummary {
    pub schemas: usize,
    pub n: FieldSummary,
    pub nnz: FieldSummary,
    pub density: FieldSummary,
    pub rank: FieldSummary,
    pub normalized_rank: FieldSummary,
    pub table_count: FieldSummary,
    pub avg_columns_per_table: FieldSummary,
    pub density_cdf: Vec<CdfPoint>,
    pub normalized_rank_cdf: Vec<CdfPoint>,
}

/// Summarizes a non-empty collection of per-schema statistics.
pub fn summarize_collection(
    stats: &[GraphStats],
    grid_points: usize,
) -> Result<CollectionSummary, Error> {
    if stats.is_empty() {
        return Err(Error::EmptyInput);
    }
    if grid_points == 0 {
        return Err(Error::Range("cdf grid needs at least one point".into()));
    }
    let field = |f: fn(&GraphStats) -> f64| -> Vec<f64> { stats.iter().map(f).collect() };
    let densities = field(|s| s.density);
    let normalized_ranks = field(|s| s.normalized_rank);
    Ok(CollectionSummary {
        schemas: stats.len(),
        n: summarize_field(&field(|s| s.n as f64)),
        nnz: summarize_field(&field(|s| s.nnz as f64)),
        density: summarize_field(&densities),
        rank: summarize_field(&field(|s| s.rank as f64)),
        normalized_rank: summarize_field(&normalized_ranks),
        table_count: summarize_field(&field(|s| s.table_count as f64)),
        avg_columns_per_table: summarize_field(&field(|s| s.avg_columns_per_table)),
        density_cdf: sample_cdf(&densities, grid_points),
        normalized_rank_cdf: sample_cdf(&normalized_ranks, grid_points),
    })
}

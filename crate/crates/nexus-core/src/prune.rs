//! Metadata-only candidate pruning: type filters, uniqueness/cardinality
//! checks, and value-domain containment. Pruned pairs become certain zeros in
//! the initial probability matrix; survivors stay latent awaiting scores.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::Error;
use crate::ingest::QueryLogJoin;
use crate::matrix::Dense;
use crate::model::{
    compare_values, CandidatePair, ColumnMeta, DataType, Direction, ObservedMask,
    ProbabilityMatrix,
};

/// Join-compatibility classes: integers are inter-compatible, strings only
/// match strings, and the two temporal types match each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TypeClass {
    Integral,
    Text,
    Temporal,
}

fn type_class(dt: DataType) -> Option<TypeClass> {
    match dt {
        DataType::Integer | DataType::Bigint => Some(TypeClass::Integral),
        DataType::Varchar => Some(TypeClass::Text),
        DataType::Date | DataType::Timestamp => Some(TypeClass::Temporal),
        _ => None,
    }
}

/// Whether two types fall in the same join-compatibility class.
pub(crate) fn same_type_class(a: DataType, b: DataType) -> bool {
    match (type_class(a), type_class(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// Indices of columns whose type can participate in a key join at all.
/// Nested types, measures, blobs, and booleans are excluded.
pub fn filter_joinable_columns(columns: &[ColumnMeta]) -> Vec<usize> {
    columns
        .iter()
        .enumerate()
        .filter(|(_, c)| type_class(c.data_type).is_some())
        .map(|(i, _)| i)
        .collect()
}

/// Uniqueness under null tolerance: distinct values cover every non-null row.
/// `None` when distinct_count is unavailable; empty columns are never unique.
fn uniqueness(c: &ColumnMeta) -> Option<bool> {
    if c.row_count == 0 {
        return Some(false);
    }
    c.distinct_count.map(|d| d == c.row_count - c.null_count)
}

/// Per-rule drop counts plus the surviving candidate list. Dropped and
/// surviving pairs always sum to the number of enumerated eligible pairs.
#[derive(Debug, Clone, Serialize)]
pub struct PruneReport {
    pub total_columns: usize,
    pub columns_dropped_by_type: usize,
    pub enumerated_pairs: usize,
    pub dropped_same_table: usize,
    pub dropped_type_incompatible: usize,
    pub dropped_uniqueness: usize,
    pub dropped_cardinality: usize,
    pub dropped_domain: usize,
    pub survivors: Vec<CandidatePair>,
}

impl PruneReport {
    pub fn dropped_total(&self) -> usize {
        self.dropped_same_table
            + self.dropped_type_incompatible
            + self.dropped_uniqueness
            + self.dropped_cardinality
            + self.dropped_domain
    }
}

/// Outcome of checking one (1-side, N-side) orientation of a pair.
enum OrientationResult {
    Pass,
    FailCardinality,
    FailDomain,
}

/// Checks rules (c) and (d) with `one` as the unique side and `many` as the
/// N side. Rules with missing statistics are skipped (recall-preserving).
fn check_orientation(one: &ColumnMeta, many: &ColumnMeta) -> OrientationResult {
    if let (Some(d_one), Some(d_many)) = (one.distinct_count, many.distinct_count) {
        if d_many > d_one {
            return OrientationResult::FailCardinality;
        }
    }
    if let (Some(one_min), Some(one_max), Some(many_min), Some(many_max)) =
        (&one.min_value, &one.max_value, &many.min_value, &many.max_value)
    {
        let lo = compare_values(one.data_type, many_min, one_min);
        let hi = compare_values(one.data_type, many_max, one_max);
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if lo == Ordering::Less || hi == Ordering::Greater {
                return OrientationResult::FailDomain;
            }
        }
    }
    OrientationResult::Pass
}

/// Enumerates all eligible-column pairs and applies the four prune rules:
/// (a) type compatibility, (b) uniqueness on the "1" side, (c) the N side's
/// cardinality cannot exceed the 1 side's, (d) the N side's value interval
/// must be contained in the 1 side's. Same-table pairs are always pruned.
pub fn prune_pairs(columns: &[ColumnMeta], eligible: &[usize]) -> PruneReport {
    let mut report = PruneReport {
        total_columns: columns.len(),
        columns_dropped_by_type: columns.len() - eligible.len(),
        enumerated_pairs: 0,
        dropped_same_table: 0,
        dropped_type_incompatible: 0,
        dropped_uniqueness: 0,
        dropped_cardinality: 0,
        dropped_domain: 0,
        survivors: Vec::new(),
    };

    for (pos, &i) in eligible.iter().enumerate() {
        for &j in &eligible[pos + 1..] {
            report.enumerated_pairs += 1;
            let (a, b) = (&columns[i], &columns[j]);
            if a.table_name == b.table_name {
                report.dropped_same_table += 1;
                continue;
            }
            if type_class(a.data_type) != type_class(b.data_type) {
                report.dropped_type_incompatible += 1;
                continue;
            }
            let (ua, ub) = (uniqueness(a), uniqueness(b));
            if ua == Some(false) && ub == Some(false) {
                report.dropped_uniqueness += 1;
                continue;
            }
            // Try every orientation whose "1" side is not known non-unique.
            let mut any_pass = false;
            let mut any_domain_fail = false;
            if ua != Some(false) {
                match check_orientation(a, b) {
                    OrientationResult::Pass => any_pass = true,
                    OrientationResult::FailDomain => any_domain_fail = true,
                    OrientationResult::FailCardinality => {}
                }
            }
            if !any_pass && ub != Some(false) {
                match check_orientation(b, a) {
                    OrientationResult::Pass => any_pass = true,
                    OrientationResult::FailDomain => any_domain_fail = true,
                    OrientationResult::FailCardinality => {}
                }
            }
            if !any_pass {
                if any_domain_fail {
                    report.dropped_domain += 1;
                } else {
                    report.dropped_cardinality += 1;
                }
                continue;
            }
            let direction = match (ua, ub) {
                (Some(true), Some(true)) => Direction::OneToOne,
                (Some(true), _) => Direction::NToOneJi,
                (_, Some(true)) => Direction::NToOneIj,
                _ => Direction::Unknown,
            };
            let (lo, hi) = (i.min(j), i.max(j));
            let direction = if lo == i { direction } else { flip(direction) };
            report.survivors.push(CandidatePair { i: lo, j: hi, direction });
        }
    }
    report
}

fn flip(d: Direction) -> Direction {
    match d {
        Direction::NToOneIj => Direction::NToOneJi,
        Direction::NToOneJi => Direction::NToOneIj,
        other => other,
    }
}

/// Builds the probability-matrix skeleton: query-log joins become certain
/// ones, non-survivor positions certain zeros, survivors stay latent with
/// value pending. Known joins that pruning would have rejected are still
/// honored as certain ones.
pub fn build_initial_mask(
    n: usize,
    survivors: &[CandidatePair],
    known: &[QueryLogJoin],
) -> Result<ProbabilityMatrix, Error> {
    let mut matrix = Dense::zeros(n);
    let mut mask = ObservedMask::all_observed(n);
    for pair in survivors {
        mask.unobserve(pair.i, pair.j);
    }
    for join in known {
        if join.i == join.j {
            return Err(Error::InvalidEdge(format!(
                "query-log join ({}, {}) is a diagonal entry",
                join.i, join.j
            )));
        }
        mask.observe(join.i, join.j);
        matrix.set_sym(join.i, join.j, 1.0);
    }
    Ok(ProbabilityMatrix { matrix, mask })
}

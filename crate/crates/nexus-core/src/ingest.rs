//! File ingestion: schema metadata documents, query-log join facts, and
//! ground-truth edge lists, plus the seeded known-join sampler used by the
//! known-join-fraction experiments.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{ColumnIndex, ColumnMeta};

/// A join fact with certain probability 1.0, e.g. observed in a query log.
/// Endpoints are resolved column indices with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QueryLogJoin {
    pub i: usize,
    pub j: usize,
}

impl QueryLogJoin {
    pub fn new(a: usize, b: usize) -> Self {
        QueryLogJoin { i: a.min(b), j: a.max(b) }
    }
}

/// Undirected ground-truth edge set over column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub edges: BTreeSet<(usize, usize)>,
}

impl GroundTruth {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        GroundTruth { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaDoc {
    tables: Vec<TableDoc>,
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    name: String,
    columns: Vec<ColumnDoc>,
}

#[derive(Serialize, Deserialize)]
struct ColumnDoc {
    name: String,
    #[serde(rename = "type")]
    type_name: String,
    row_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distinct_count: Option<u64>,
    #[serde(default)]
    null_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    left: String,
    right: String,
}

fn read_file(path: &Path) -> Result<String, Error> {
    Ok(std::fs::read_to_string(path)?)
}

fn format_error(path: &Path, e: &serde_json::Error) -> Error {
    Error::Format {
        path: path.display().to_string(),
        detail: format!("line {} column {}: {e}", e.line(), e.column()),
    }
}

/// Parses a schema metadata document into column records, validating each
/// record's statistics.
pub fn parse_schema(json: &str, origin: &Path) -> Result<Vec<ColumnMeta>, Error> {
    let doc: SchemaDoc = serde_json::from_str(json).map_err(|e| format_error(origin, &e))?;
    let mut columns = Vec::new();
    for table in doc.tables {
        for col in table.columns {
            let meta = ColumnMeta {
                table_name: table.name.clone(),
                column_name: col.name,
                data_type: col.type_name.parse().expect("infallible"),
                row_count: col.row_count,
                distinct_count: col.distinct_count,
                null_count: col.null_count,
                min_value: col.min,
                max_value: col.max,
            };
            meta.validate()?;
            columns.push(meta);
        }
    }
    Ok(columns)
}

pub fn load_schema_file(path: impl AsRef<Path>) -> Result<Vec<ColumnMeta>, Error> {
    let path = path.as_ref();
    parse_schema(&read_file(path)?, path)
}

/// Serializes column records back to the schema document format. Tables are
/// emitted in first-appearance order, so `parse_schema(serialize_schema(x))`
/// round-trips exactly.
pub fn serialize_schema(columns: &[ColumnMeta]) -> String {
    let mut tables: Vec<TableDoc> = Vec::new();
    for c in columns {
        let doc = ColumnDoc {
            name: c.column_name.clone(),
            type_name: c.data_type.to_string(),
            row_count: c.row_count,
            distinct_count: c.distinct_count,
            null_count: c.null_count,
            min: c.min_value.clone(),
            max: c.max_value.clone(),
        };
        match tables.iter_mut().find(|t| t.name == c.table_name) {
            Some(t) => t.columns.push(doc),
            None => tables.push(TableDoc { name: c.table_name.clone(), columns: vec![doc] }),
        }
    }
    serde_json::to_string_pretty(&SchemaDoc { tables }).expect("schema doc serializes")
}

fn parse_edge_list(
    json: &str,
    origin: &Path,
    index: &ColumnIndex,
) -> Result<(Vec<(usize, usize)>, usize), Error> {
    let docs: Vec<EdgeDoc> = serde_json::from_str(json).map_err(|e| format_error(origin, &e))?;
    let mut edges = Vec::new();
    let mut skipped = 0;
    for doc in docs {
        match (index.resolve_qualified(&doc.left), index.resolve_qualified(&doc.right)) {
            (Some(a), Some(b)) => {
                if a == b {
                    return Err(Error::InvalidEdge(format!(
                        "self-edge {} – {}",
                        doc.left, doc.right
                    )));
                }
                edges.push((a.min(b), a.max(b)));
            }
            _ => skipped += 1,
        }
    }
    Ok((edges, skipped))
}

/// Loads query-log join facts. Unresolvable endpoints are skipped and
/// counted; duplicates (in either orientation) collapse to one fact.
pub fn load_query_log(
    path: impl AsRef<Path>,
    index: &ColumnIndex,
) -> Result<(Vec<QueryLogJoin>, usize), Error> {
    let path = path.as_ref();
    let (edges, skipped) = parse_edge_list(&read_file(path)?, path, index)?;
    let unique: BTreeSet<(usize, usize)> = edges.into_iter().collect();
    Ok((unique.into_iter().map(|(i, j)| QueryLogJoin { i, j }).collect(), skipped))
}

/// Loads a ground-truth edge list; analogous to `load_query_log`.
pub fn load_ground_truth(
    path: impl AsRef<Path>,
    index: &ColumnIndex,
) -> Result<(GroundTruth, usize), Error> {
    let path = path.as_ref();
    let (edges, skipped) = parse_edge_list(&read_file(path)?, path, index)?;
    Ok((GroundTruth::from_pairs(edges), skipped))
}

/// Draws `round(fraction · |truth|)` edges from the ground truth as if they
/// had been observed in a query log.
///
/// Implemented as a seeded shuffle plus prefix take, so for a fixed seed the
/// sampled sets are nested across increasing fractions.
pub fn sample_known_joins(
    truth: &GroundTruth,
    fraction: f64,
    seed: u64,
) -> Result<Vec<QueryLogJoin>, Error> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Range(format!("fraction {fraction} outside [0,1]")));
    }
    let mut edges: Vec<(usize, usize)> = truth.edges.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    let take = (fraction * truth.len() as f64).round() as usize;
    let mut out: Vec<QueryLogJoin> =
        edges[..take].iter().map(|&(i, j)| QueryLogJoin { i, j }).collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_column_index, meta, DataType};

    fn sample_columns() -> Vec<ColumnMeta> {
        vec![
            meta("orders", "o_custkey", DataType::Bigint, 100, 40, 0, Some("1"), Some("50")),
            meta("customer", "c_custkey", DataType::Bigint, 50, 50, 0, Some("1"), Some("50")),
            meta("customer", "c_name", DataType::Varchar, 50, 50, 0, None, None),
        ]
    }

    #[test]
    fn schema_round_trips_through_document_format() {
        let cols = sample_columns();
        let json = serialize_schema(&cols);
        let back = parse_schema(&json, Path::new("mem")).unwrap();
        assert_eq!(back, cols);
    }

    #[test]
    fn empty_tables_array_yields_no_columns() {
        let cols = parse_schema(r#"{"tables": []}"#, Path::new("mem")).unwrap();
        assert!(cols.is_empty());
    }

    #[test]
    fn invalid_stats_are_rejected_at_load() {
        let json = r#"{"tables": [{"name": "t", "columns": [
            {"name": "c", "type": "INTEGER", "row_count": 5, "distinct_count": 9, "null_count": 0}
        ]}]}"#;
        assert!(matches!(
            parse_schema(json, Path::new("mem")),
            Err(Error::InvalidStats { .. })
        ));
    }

    #[test]
    fn parse_failure_reports_position() {
        let err = parse_schema("{not json", Path::new("bad.json")).unwrap_err();
        match err {
            Error::Format { path, detail } => {
                assert_eq!(path, "bad.json");
                assert!(detail.contains("line 1"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn query_log_dedups_and_counts_skips() {
        let cols = sample_columns();
        let index = build_column_index(&cols).unwrap();
        let dir = std::env::temp_dir().join(format!("nexus_ingest_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("log.json");
        std::fs::write(
            &path,
            r#"[
                {"left": "orders.o_custkey", "right": "customer.c_custkey"},
                {"left": "customer.c_custkey", "right": "orders.o_custkey"},
                {"left": "orders.o_custkey", "right": "ghost.column"}
            ]"#,
        )
        .unwrap();
        let (joins, skipped) = load_query_log(&path, &index).unwrap();
        assert_eq!(joins, vec![QueryLogJoin { i: 0, j: 1 }]);
        assert_eq!(skipped, 1);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn ground_truth_rejects_self_edges() {
        let cols = sample_columns();
        let index = build_column_index(&cols).unwrap();
        let dir = std::env::temp_dir().join(format!("nexus_ingest_self_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("truth.json");
        std::fs::write(&path, r#"[{"left": "orders.o_custkey", "right": "orders.o_custkey"}]"#)
            .unwrap();
        assert!(matches!(load_ground_truth(&path, &index), Err(Error::InvalidEdge(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let index = build_column_index(&[]).unwrap();
        assert!(matches!(
            load_query_log("/nonexistent/nexus.json", &index),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn sampler_is_deterministic_and_nested() {
        let truth = GroundTruth::from_pairs((0..10).map(|k| (k, k + 10)));
        assert!(sample_known_joins(&truth, 0.0, 7).unwrap().is_empty());
        assert_eq!(sample_known_joins(&truth, 1.0, 7).unwrap().len(), 10);
        assert!(sample_known_joins(&truth, 1.5, 7).is_err());

        let a = sample_known_joins(&truth, 0.4, 7).unwrap();
        let b = sample_known_joins(&truth, 0.4, 7).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);

        // Prefix sampling nests smaller fractions inside larger ones.
        let larger = sample_known_joins(&truth, 0.8, 7).unwrap();
        for join in &a {
            assert!(larger.contains(join));
        }
    }
}

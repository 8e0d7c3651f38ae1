//! The semantic entity-type oracle: the pluggable service that annotates
//! columns with free-text entity types, soft-matches two types in context,
//! and (for the LLM prior) predicts whether a candidate pair joins.
//!
//! The deterministic mock implementation backs every test; an HTTP adapter
//! for a real LLM service lives in the CLI crate.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Deserialize;

use crate::error::Error;
use crate::score::ConfidenceLevel;

/// A column identified for the oracle by its table and column name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef { table: table.into(), column: column.into() }
    }

    pub fn qualified(&self) -> String {
        format!("{}.{}", self.table, self.column)
    }
}

/// A column together with its previously fetched entity type, the context a
/// soft-match request carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedColumn {
    pub table: String,
    pub column: String,
    pub entity_type: String,
}

/// Join prediction for one candidate pair, as returned by the LLM prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinPrediction {
    pub joins: bool,
    pub confidence: ConfidenceLevel,
}

/// Free-text entity types are compared character-wise after lowercasing and
/// collapsing whitespace; only on mismatch is the oracle's soft match asked.
pub fn normalize_entity_type(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Sentinel entity type assigned when the oracle returns nothing usable.
pub const UNKNOWN_ENTITY_TYPE: &str = "unknown";

pub trait SemanticOracle: Send + Sync {
    /// Annotates one batch of columns with free-text entity types, one per
    /// input column in order.
    fn annotate(&self, columns: &[ColumnRef]) -> Result<Vec<String>, Error>;

    /// Whether two entity types match semantically, given column context.
    fn soft_match(&self, a: &TypedColumn, b: &TypedColumn) -> Result<bool, Error>;

    /// Predicts join/no-join with a confidence level for each pair.
    fn predict_joins(&self, pairs: &[(ColumnRef, ColumnRef)]) -> Result<Vec<JoinPrediction>, Error>;

    /// Annotates several batches; adapters with network transports may
    /// override this to keep a bounded number of requests in flight. Results
    /// come back in input order regardless of completion order.
    fn annotate_many(&self, batches: &[&[ColumnRef]]) -> Vec<Result<Vec<String>, Error>> {
        batches.iter().map(|b| self.annotate(b)).collect()
    }
}

#[derive(Debug, Deserialize)]
struct MockFixture {
    #[serde(default)]
    annotations: BTreeMap<String, String>,
    #[serde(default)]
    synonyms: Vec<(String, String)>,
    #[serde(default)]
    predictions: BTreeMap<String, MockPrediction>,
}

#[derive(Debug, Deserialize)]
struct MockPrediction {
    joins: bool,
    confidence: ConfidenceLevel,
}

/// Deterministic in-memory oracle. Annotations map `table.column` to an
/// entity type (unknown columns get an empty annotation); synonym pairs, in
/// either order, are the only soft matches; predictions map
/// `table.column|table.column` keys (endpoints lexicographically ordered) to
/// a (joins, confidence) pair, defaulting to a confident negative.
#[derive(Debug, Default)]
pub struct MockOracle {
    annotations: BTreeMap<String, String>,
    synonyms: BTreeSet<(String, String)>,
    predictions: BTreeMap<String, JoinPrediction>,
    annotate_calls: AtomicUsize,
    match_calls: AtomicUsize,
    predict_calls: AtomicUsize,
}

impl MockOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(json: &str, origin: &str) -> Result<Self, Error> {
        let fixture: MockFixture = serde_json::from_str(json).map_err(|e| Error::Format {
            path: origin.to_string(),
            detail: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        let mut oracle = MockOracle::new();
        oracle.annotations = fixture.annotations;
        for (a, b) in fixture.synonyms {
            oracle.add_synonym(&a, &b);
        }
        for (key, p) in fixture.predictions {
            oracle
                .predictions
                .insert(key, JoinPrediction { joins: p.joins, confidence: p.confidence });
        }
        Ok(oracle)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn annotate_with(&mut self, table: &str, column: &str, entity_type: &str) {
        self.annotations.insert(format!("{table}.{column}"), entity_type.to_string());
    }

    pub fn add_synonym(&mut self, a: &str, b: &str) {
        let (a, b) = (normalize_entity_type(a), normalize_entity_type(b));
        let key = if a <= b { (a, b) } else { (b, a) };
        self.synonyms.insert(key);
    }

    pub fn predict_with(&mut self, a: &str, b: &str, joins: bool, confidence: ConfidenceLevel) {
        let key = if a <= b { format!("{a}|{b}") } else { format!("{b}|{a}") };
        self.predictions.insert(key, JoinPrediction { joins, confidence });
    }

    pub fn annotate_call_count(&self) -> usize {
        self.annotate_calls.load(Ordering::Relaxed)
    }

    pub fn match_call_count(&self) -> usize {
        self.match_calls.load(Ordering::Relaxed)
    }

    pub fn predict_call_count(&self) -> usize {
        self.predict_calls.load(Ordering::Relaxed)
    }
}

impl SemanticOracle for MockOracle {
    fn annotate(&self, columns: &[ColumnRef]) -> Result<Vec<String>, Error> {
        self.annotate_calls.fetch_add(1, Ordering::Relaxed);
        Ok(columns
            .iter()
            .map(|c| self.annotations.get(&c.qualified()).cloned().unwrap_or_default())
            .collect())
    }

    fn soft_match(&self, a: &TypedColumn, b: &TypedColumn) -> Result<bool, Error> {
        self.match_calls.fetch_add(1, Ordering::Relaxed);
        let (x, y) = (normalize_entity_type(&a.entity_type), normalize_entity_type(&b.entity_type));
        let key = if x <= y { (x, y) } else { (y, x) };
        Ok(self.synonyms.contains(&key))
    }

    fn predict_joins(&self, pairs: &[(ColumnRef, ColumnRef)]) -> Result<Vec<JoinPrediction>, Error> {
        self.predict_calls.fetch_add(1, Ordering::Relaxed);
        Ok(pairs
            .iter()
            .map(|(a, b)| {
                let (qa, qb) = (a.qualified(), b.qualified());
                let key = if qa <= qb { format!("{qa}|{qb}") } else { format!("{qb}|{qa}") };
                self.predictions.get(&key).copied().unwrap_or(JoinPrediction {
                    joins: false,
                    confidence: ConfidenceLevel::High,
                })
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_annotates_known_columns_and_blanks_unknown_ones() {
        let mut mock = MockOracle::new();
        mock.annotate_with("employee", "id", "employee ID");
        let types = mock
            .annotate(&[ColumnRef::new("employee", "id"), ColumnRef::new("ghost", "col")])
            .unwrap();
        assert_eq!(types, vec!["employee ID".to_string(), String::new()]);
        assert_eq!(mock.annotate_call_count(), 1);
    }

    #[test]
    fn soft_match_uses_the_synonym_table_in_either_order() {
        let mut mock = MockOracle::new();
        mock.add_synonym("client id", "customer id");
        let a = TypedColumn {
            table: "client".into(),
            column: "id".into(),
            entity_type: "Customer ID".into(),
        };
        let b = TypedColumn {
            table: "customer".into(),
            column: "id".into(),
            entity_type: "client  id".into(),
        };
        assert!(mock.soft_match(&a, &b).unwrap());
        assert!(mock.soft_match(&b, &a).unwrap());
        let c = TypedColumn {
            table: "product".into(),
            column: "id".into(),
            entity_type: "product id".into(),
        };
        assert!(!mock.soft_match(&a, &c).unwrap());
    }

    #[test]
    fn fixture_json_loads_all_three_sections() {
        let json = r#"{
            "annotations": {"employee.id": "employee ID"},
            "synonyms": [["client id", "customer id"]],
            "predictions": {"a.x|b.y": {"joins": true, "confidence": "high"}}
        }"#;
        let mock = MockOracle::from_json(json, "mem").unwrap();
        let types = mock.annotate(&[ColumnRef::new("employee", "id")]).unwrap();
        assert_eq!(types[0], "employee ID");
        let preds = mock
            .predict_joins(&[(ColumnRef::new("a", "x"), ColumnRef::new("b", "y"))])
            .unwrap();
        assert_eq!(preds[0], JoinPrediction { joins: true, confidence: ConfidenceLevel::High });
        // Unlisted pairs default to a confident negative.
        let preds = mock
            .predict_joins(&[(ColumnRef::new("a", "x"), ColumnRef::new("b", "z"))])
            .unwrap();
        assert_eq!(preds[0], JoinPrediction { joins: false, confidence: ConfidenceLevel::High });
    }

    #[test]
    fn entity_type_normalization_collapses_case_and_whitespace() {
        assert_eq!(normalize_entity_type("  Customer   ID "), "customer id");
    }
}

//! Domain model shared by every pipeline stage: column metadata, the dense
//! column index, probability/latent/adjacency matrices, and the observed-entry
//! mask that partitions certain entries from latent ones.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::matrix::Dense;

/// Logical column type. Anything outside the closed set maps to `Other`,
/// which is treated as non-joinable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DataType {
    Integer,
    Bigint,
    Varchar,
    Date,
    Timestamp,
    Float,
    Double,
    Decimal,
    Boolean,
    Blob,
    Json,
    Array,
    Map,
    Other,
}

impl FromStr for DataType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "INTEGER" | "INT" => DataType::Integer,
            "BIGINT" => DataType::Bigint,
            "VARCHAR" | "CHAR" | "TEXT" | "STRING" => DataType::Varchar,
            "DATE" => DataType::Date,
            "TIMESTAMP" | "DATETIME" => DataType::Timestamp,
            "FLOAT" | "REAL" => DataType::Float,
            "DOUBLE" => DataType::Double,
            "DECIMAL" | "NUMERIC" => DataType::Decimal,
            "BOOLEAN" | "BOOL" => DataType::Boolean,
            "BLOB" | "BINARY" | "BYTEA" => DataType::Blob,
            "JSON" | "JSONB" => DataType::Json,
            "ARRAY" => DataType::Array,
            "MAP" | "STRUCT" | "OBJECT" => DataType::Map,
            _ => DataType::Other,
        })
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_string(self).expect("enum serializes");
        write!(f, "{}", s.trim_matches('"'))
    }
}

/// One column's metadata record — the only inference input besides query-log
/// join facts. `min_value`/`max_value` are kept as strings and compared under
/// a type-directed ordering (numeric parse for numeric types, lexicographic
/// otherwise; ISO-8601 date strings order correctly lexicographically).
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMeta {
    pub table_name: String,
    pub column_name: String,
    pub data_type: DataType,
    pub row_count: u64,
    pub distinct_count: Option<u64>,
    pub null_count: u64,
    pub min_value: Option<String>,
    pub max_value: Option<String>,
}

impl ColumnMeta {
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.table_name, self.column_name)
    }

    /// Checks the record's internal consistency.
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |detail: String| Error::InvalidStats { column: self.qualified_name(), detail };
        if let Some(d) = self.distinct_count {
            if d > self.row_count {
                return Err(fail(format!(
                    "distinct_count {d} exceeds row_count {}",
                    self.row_count
                )));
            }
        }
        if self.null_count > self.row_count {
            return Err(fail(format!(
                "null_count {} exceeds row_count {}",
                self.null_count, self.row_count
            )));
        }
        if let (Some(lo), Some(hi)) = (&self.min_value, &self.max_value) {
            if compare_values(self.data_type, lo, hi) == Some(Ordering::Greater) {
                return Err(fail(format!("min {lo:?} exceeds max {hi:?}")));
            }
        }
        Ok(())
    }
}

/// Compares two scalar-as-string values under `dt`'s ordering. Returns `None`
/// when the type is unordered or a value fails to parse, in which case callers
/// skip whatever rule needed the comparison.
pub fn compare_values(dt: DataType, a: &str, b: &str) -> Option<Ordering> {
    match dt {
        DataType::Integer | DataType::Bigint => match (a.parse::<i128>(), b.parse::<i128>()) {
            (Ok(x), Ok(y)) => Some(x.cmp(&y)),
            _ => numeric_cmp(a, b),
        },
        DataType::Float | DataType::Double | DataType::Decimal => numeric_cmp(a, b),
        DataType::Varchar | DataType::Date | DataType::Timestamp => Some(a.cmp(b)),
        _ => None,
    }
}

fn numeric_cmp(a: &str, b: &str) -> Option<Ordering> {
    let (x, y) = (a.parse::<f64>().ok()?, b.parse::<f64>().ok()?);
    x.partial_cmp(&y)
}

/// Dense, stable mapping from `(table, column)` pairs to matrix indices.
#[derive(Debug, Clone)]
pub struct ColumnIndex {
    names: Vec<(String, String)>,
    lookup: HashMap<(String, String), usize>,
}

impl ColumnIndex {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &(String, String) {
        &self.names[i]
    }

    pub fn qualified(&self, i: usize) -> String {
        let (t, c) = &self.names[i];
        format!("{t}.{c}")
    }

    pub fn get(&self, table: &str, column: &str) -> Option<usize> {
        self.lookup.get(&(table.to_string(), column.to_string())).copied()
    }

    /// Resolves a `table.column` string, splitting on the first dot.
    pub fn resolve_qualified(&self, qualified: &str) -> Option<usize> {
        let (t, c) = qualified.split_once('.')?;
        self.get(t, c)
    }

    pub fn table_count(&self) -> usize {
        let mut tables: Vec<&str> = self.names.iter().map(|(t, _)| t.as_str()).collect();
        tables.sort_unstable();
        tables.dedup();
        tables.len()
    }
}

/// Builds the dense column index in input order.
pub fn build_column_index(columns: &[ColumnMeta]) -> Result<ColumnIndex, Error> {
    let mut names = Vec::with_capacity(columns.len());
    let mut lookup = HashMap::with_capacity(columns.len());
    for (i, c) in columns.iter().enumerate() {
        let key = (c.table_name.clone(), c.column_name.clone());
        if lookup.insert(key.clone(), i).is_some() {
            return Err(Error::DuplicateColumn(c.table_name.clone(), c.column_name.clone()));
        }
        names.push(key);
    }
    Ok(ColumnIndex { names, lookup })
}

/// The set Ω of matrix positions whose values are certain (pruned zeros,
/// query-log ones, the diagonal); its complement Ω̄ holds the latent candidate
/// positions. Stored dense and kept symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedMask {
    n: usize,
    observed: Vec<bool>,
}

impl ObservedMask {
    /// Mask with every position in Ω.
    pub fn all_observed(n: usize) -> Self {
        ObservedMask { n, observed: vec![true; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[i * self.n + j]
    }

    /// Moves `(i, j)` and `(j, i)` into Ω.
    pub fn observe(&mut self, i: usize, j: usize) {
        self.observed[i * self.n + j] = true;
        self.observed[j * self.n + i] = true;
    }

    /// Moves `(i, j)` and `(j, i)` into Ω̄. The diagonal stays certain.
    pub fn unobserve(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j, "diagonal entries are always observed");
        self.observed[i * self.n + j] = false;
        self.observed[j * self.n + i] = false;
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn unobserved_count(&self) -> usize {
        self.n * self.n - self.observed_count()
    }

    /// Upper-triangle (i < j) positions currently in Ω̄, in ascending order.
    pub fn unobserved_upper_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !self.is_observed(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Error> {
        for i in 0..self.n {
            if !self.is_observed(i, i) {
                return Err(Error::MaskViolation(format!("diagonal ({i},{i}) not observed")));
            }
            for j in (i + 1)..self.n {
                if self.is_observed(i, j) != self.is_observed(j, i) {
                    return Err(Error::MaskViolation(format!("mask asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }
}

/// Symmetric matrix S of pairwise join probabilities with its observed mask.
/// Entries at Ω positions are exactly 0 or 1; Ω̄ entries are scores in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    pub matrix: Dense,
    pub mask: ObservedMask,
}

impl ProbabilityMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let n = self.n();
        if self.mask.n() != n {
            return Err(Error::Shape(format!("mask size {} vs matrix {n}", self.mask.n())));
        }
        self.mask.validate()?;
        for i in 0..n {
            if self.matrix.get(i, i) != 0.0 {
                return Err(Error::MaskViolation(format!("nonzero diagonal at ({i},{i})")));
            }
            for j in 0..n {
                let v = self.matrix.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Range(format!("S[{i}][{j}] = {v} outside [0,1]")));
                }
                if self.matrix.get(j, i) != v {
                    return Err(Error::Shape(format!("S asymmetric at ({i},{j})")));
                }
                if self.mask.is_observed(i, j) && v != 0.0 && v != 1.0 {
                    return Err(Error::MaskViolation(format!(
                        "observed entry ({i},{j}) = {v} is neither 0 nor 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The recovered real-valued matrix M; entries in [0, 1], symmetric, equal to
/// S at Ω positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix {
    pub matrix: Dense,
}

/// Binary symmetric adjacency matrix of a join graph (zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct JoinGraphMatrix {
    pub matrix: Dense,
}

impl JoinGraphMatrix {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut m = Dense::zeros(n);
        for &(i, j) in edges {
            debug_assert_ne!(i, j);
            m.set_sym(i, j, 1.0);
        }
        JoinGraphMatrix { matrix: m }
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Upper-triangle positive positions.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.matrix.get(i, j) != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Direction hint attached to a surviving candidate: which side showed the
/// uniqueness evidence. The recovered graph itself stays undirected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    OneToOne,
    /// `i` is the N side, `j` the unique ("1") side.
    NToOneIj,
    /// `j` is the N side, `i` the unique ("1") side.
    NToOneJi,
    Unknown,
}

/// Surviving join candidate over column indices, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub i: usize,
    pub j: usize,
    pub direction: Direction,
}

#[cfg(test)]
pub(crate) fn meta(
    table: &str,
    column: &str,
    dt: DataType,
    rows: u64,
    distinct: impl Into<Option<u64>>,
    nulls: u64,
    min: Option<&str>,
    max: Option<&str>,
) -> ColumnMeta {
    ColumnMeta {
        table_name: table.to_string(),
        column_name: column.to_string(),
        data_type: dt,
        row_count: rows,
        distinct_count: distinct.into(),
        null_count: nulls,
        min_value: min.map(str::to_string),
        max_value: max.map(str::to_string),
    }
}

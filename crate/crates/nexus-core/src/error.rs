use thiserror::Error;

/// Crate-wide error type; variants map one-to-one onto the failure modes of
/// the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate column {0}.{1}")]
    DuplicateColumn(String, String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("format error in {path}: {detail}")]
    Format { path: String, detail: String },
    #[error("invalid statistics for column {column}: {detail}")]
    InvalidStats { column: String, detail: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("oracle protocol violation: {0}")]
    Protocol(String),
    #[error("missing scores for {0} surviving candidate pair(s)")]
    IncompleteScores(usize),
    #[error("mask violation: {0}")]
    MaskViolation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("input collection is empty")]
    EmptyInput,
    #[error("in stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}

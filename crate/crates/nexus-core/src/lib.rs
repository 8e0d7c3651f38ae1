//! Metadata-only join-graph inference.
//!
//! The pipeline recovers the pairwise join relationships of a table
//! collection from column metadata alone: cheap filters prune the candidate
//! pairs, a pluggable prior scores the survivors, and the resulting partial
//! adjacency matrix is completed under nuclear-norm and L1 regularization.
//! An optional EM loop alternates completion with probability updates driven
//! by a semantic entity-type oracle, promoting confirmed candidates to
//! certain entries and decaying mismatched ones.

pub mod analysis;
pub mod em;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod lrmc;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod prune;
pub mod score;
pub mod synth;

pub use error::Error;

//! Prior scoring of surviving candidates: name-similarity features, the
//! deterministic heuristic prior, externally supplied score files, and the
//! LLM prior that maps join predictions with confidence levels to
//! probabilities.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{ColumnIndex, ColumnMeta, ProbabilityMatrix};
use crate::oracle::{ColumnRef, SemanticOracle};
use crate::prune::same_type_class;

/// Which prior fills the latent entries of the probability matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Heuristic,
    ScoreFile(String),
    Llm,
}

/// Confidence level attached to an oracle join prediction, with the fixed
/// probability mapping low → 0.1, medium → 0.6, high → 0.9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceLevel {
    Low,
    Medium,
    High,
}

impl ConfidenceLevel {
    pub fn probability(self) -> f64 {
        match self {
            ConfidenceLevel::Low => 0.1,
            ConfidenceLevel::Medium => 0.6,
            ConfidenceLevel::High => 0.9,
        }
    }
}

/// Maps a prediction to a join probability: positive predictions take the
/// level's probability, negative ones its complement (a high-confidence
/// negative lands at 0.1).
pub fn prediction_score(joins: bool, level: ConfidenceLevel) -> f64 {
    if joins {
        level.probability()
    } else {
        1.0 - level.probability()
    }
}

/// Pairwise name and statistics features for one candidate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub name_containment: f64,
    pub name_jaccard: f64,
    pub edit_distance_ratio: f64,
    pub jaro_winkler: f64,
    pub embedding_cosine: f64,
    pub type_match: bool,
    pub cardinality_ratio: f64,
    pub null_ratio_i: f64,
    pub null_ratio_j: f64,
}

/// Lowercase identifier tokens of a `table.column` string, split on
/// non-alphanumeric characters and camelCase boundaries. Single-character
/// tokens (Hungarian-style prefixes like the `o` of `o_custkey`) carry no
/// signal and are dropped.
pub fn tokenize(s: &str) -> BTreeSet<String> {
    let mut tokens = BTreeSet::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for ch in s.chars() {
        if !ch.is_alphanumeric() {
            push_token(&mut tokens, &mut current);
            prev_lower = false;
            continue;
        }
        if ch.is_uppercase() && prev_lower {
            push_token(&mut tokens, &mut current);
        }
        prev_lower = ch.is_lowercase() || ch.is_numeric();
        current.extend(ch.to_lowercase());
    }
    push_token(&mut tokens, &mut current);
    tokens
}

fn push_token(tokens: &mut BTreeSet<String>, current: &mut String) {
    if current.chars().count() > 1 {
        tokens.insert(std::mem::take(current));
    } else {
        current.clear();
    }
}

const EMBED_DIM: usize = 256;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const EMBED_SEED: u64 = 0x6a6f_696e_6772_6170; // constant hash seed

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic character-trigram embedding: each 3-gram of the lowercased
/// name hashes into one of 256 buckets; the count vector is ℓ2-normalized.
/// Names shorter than three characters embed as a single gram.
pub fn embed_name(name: &str) -> Vec<f64> {
    let chars: Vec<char> = name.to_lowercase().chars().collect();
    let mut v = vec![0.0; EMBED_DIM];
    let mut add = |gram: &[char]| {
        let s: String = gram.iter().collect();
        let bucket = (fnv1a(EMBED_SEED, s.as_bytes()) % EMBED_DIM as u64) as usize;
        v[bucket] += 1.0;
    };
    if chars.is_empty() {
        return v;
    }
    if chars.len() < 3 {
        add(&chars);
    } else {
        for w in chars.windows(3) {
            add(w);
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Computes all pair features. Token features use the full `table.column`
/// strings; string-distance and embedding features compare the column names
/// themselves so that a shared table prefix neither helps nor hurts.
pub fn compute_pair_features(a: &ColumnMeta, b: &ColumnMeta) -> PairFeatures {
    let tokens_a = tokenize(&a.qualified_name());
    let tokens_b = tokenize(&b.qualified_name());
    let inter = tokens_a.intersection(&tokens_b).count() as f64;
    let min_len = tokens_a.len().min(tokens_b.len()) as f64;
    let union = tokens_a.union(&tokens_b).count() as f64;
    let name_containment = if min_len > 0.0 { inter / min_len } else { 0.0 };
    let name_jaccard = if union > 0.0 { inter / union } else { 0.0 };

    let ca = a.column_name.to_lowercase();
    let cb = b.column_name.to_lowercase();
    let max_chars = ca.chars().count().max(cb.chars().count());
    let edit_distance_ratio = if max_chars > 0 {
        strsim::levenshtein(&ca, &cb) as f64 / max_chars as f64
    } else {
        0.0
    };
    let jaro_winkler = strsim::jaro_winkler(&ca, &cb);
    let embedding_cosine = cosine(&embed_name(&a.column_name), &embed_name(&b.column_name));

    let cardinality_ratio = match (a.distinct_count, b.distinct_count) {
        (Some(x), Some(y)) if x > 0 && y > 0 => x.min(y) as f64 / x.max(y) as f64,
        _ => 1.0,
    };
    let null_ratio = |c: &ColumnMeta| {
        if c.row_count > 0 {
            c.null_count as f64 / c.row_count as f64
        } else {
            0.0
        }
    };

    PairFeatures {
        name_containment,
        name_jaccard,
        edit_distance_ratio,
        jaro_winkler,
        embedding_cosine,
        type_match: same_type_class(a.data_type, b.data_type),
        cardinality_ratio,
        null_ratio_i: null_ratio(a),
        null_ratio_j: null_ratio(b),
    }
}

/// Weights of the heuristic prior; the defaults are fixed and documented,
/// and the combination is monotone non-decreasing in every feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicWeights {
    pub name_overlap: f64,
    pub jaro_winkler: f64,
    pub embedding: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        HeuristicWeights { name_overlap: 0.5, jaro_winkler: 0.3, embedding: 0.2 }
    }
}

pub fn heuristic_score(f: &PairFeatures) -> f64 {
    heuristic_score_weighted(f, &HeuristicWeights::default())
}

pub fn heuristic_score_weighted(f: &PairFeatures, w: &HeuristicWeights) -> f64 {
    let raw = w.name_overlap * f.name_containment.max(f.name_jaccard)
        + w.jaro_winkler * f.jaro_winkler
        + w.embedding * f.embedding_cosine.max(0.0);
    raw.clamp(0.0, 1.0)
}

/// Canonical score-file key for a pair: both endpoints qualified and
/// lexicographically ordered, joined with `|`.
pub fn pair_key(index: &ColumnIndex, i: usize, j: usize) -> String {
    let (a, b) = (index.qualified(i), index.qualified(j));
    if a <= b {
        format!("{a}|{b}")
    } else {
        format!("{b}|{a}")
    }
}

/// Loads externally produced scores for the surviving pairs. Survivors
/// missing from the file default to the maximal-entropy prior 0.5; keys that
/// match no survivor are counted and ignored.
pub fn load_score_file(
    path: impl AsRef<Path>,
    survivors: &[(usize, usize)],
    index: &ColumnIndex,
) -> Result<(BTreeMap<(usize, usize), f64>, usize), Error> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path)?;
    let file: BTreeMap<String, f64> = serde_json::from_str(&raw).map_err(|e| Error::Format {
        path: path.display().to_string(),
        detail: format!("line {} column {}: {e}", e.line(), e.column()),
    })?;
    for (key, score) in &file {
        if !(0.0..=1.0).contains(score) {
            return Err(Error::Range(format!("score {score} for {key} outside [0,1]")));
        }
    }
    let mut scores = BTreeMap::new();
    let mut matched_keys = BTreeSet::new();
    for &(i, j) in survivors {
        let key = pair_key(index, i, j);
        let score = file.get(&key).copied().unwrap_or(0.5);
        if file.contains_key(&key) {
            matched_keys.insert(key);
        }
        scores.insert((i.min(j), i.max(j)), score);
    }
    let ignored = file.len() - matched_keys.len();
    Ok((scores, ignored))
}

/// Scores candidates through the oracle's join-prediction capability in
/// batches of at most `batch_size` pairs per request.
pub fn llm_score_batch(
    pairs: &[(usize, usize)],
    index: &ColumnIndex,
    oracle: &dyn SemanticOracle,
    batch_size: usize,
) -> Result<BTreeMap<(usize, usize), f64>, Error> {
    let mut scores = BTreeMap::new();
    for chunk in pairs.chunks(batch_size.max(1)) {
        let refs: Vec<(ColumnRef, ColumnRef)> = chunk
            .iter()
            .map(|&(i, j)| {
                let (ti, ci) = index.name(i);
                let (tj, cj) = index.name(j);
                (ColumnRef::new(ti.clone(), ci.clone()), ColumnRef::new(tj.clone(), cj.clone()))
            })
            .collect();
        let predictions = oracle.predict_joins(&refs)?;
        if predictions.len() != chunk.len() {
            return Err(Error::Protocol(format!(
                "oracle returned {} predictions for a batch of {}",
                predictions.len(),
                chunk.len()
            )));
        }
        for (&(i, j), p) in chunk.iter().zip(&predictions) {
            scores.insert((i.min(j), i.max(j)), prediction_score(p.joins, p.confidence));
        }
    }
    Ok(scores)
}

/// Writes the scores into the latent positions of the skeleton. Every Ω̄
/// survivor position must be covered; scores at certain positions are
/// rejected.
pub fn fill_probability_matrix(
    skeleton: &ProbabilityMatrix,
    scores: &BTreeMap<(usize, usize), f64>,
) -> Result<ProbabilityMatrix, Error> {
    let mut filled = skeleton.clone();
    let pending = skeleton.mask.unobserved_upper_pairs();
    for (key, &score) in scores {
        let (i, j) = *key;
        if skeleton.mask.is_observed(i, j) {
            return Err(Error::MaskViolation(format!(
                "score injected at certain position ({i},{j})"
            )));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Range(format!("score {score} at ({i},{j}) outside [0,1]")));
        }
        filled.matrix.set_sym(i, j, score);
    }
    let missing = pending.iter().filter(|p| !scores.contains_key(p)).count();
    if missing > 0 {
        return Err(Error::IncompleteScores(missing));
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_column_index, meta, DataType};
    use crate::oracle::MockOracle;
    use proptest::prelude::*;

    fn col(table: &str, name: &str) -> ColumnMeta {
        meta(table, name, DataType::Bigint, 100, 50, 0, None, None)
    }

    #[test]
    fn identical_names_score_as_identical() {
        let a = meta("customer", "c_custkey", DataType::Bigint, 10, 10, 0, None, None);
        let f = compute_pair_features(&a, &a);
        assert_eq!(f.name_jaccard, 1.0);
        assert_eq!(f.edit_distance_ratio, 0.0);
        assert_eq!(f.jaro_winkler, 1.0);
        assert!((f.embedding_cosine - 1.0).abs() < 1e-12);
        assert!(heuristic_score(&f) >= 0.9);
    }

    #[test]
    fn disjoint_names_score_as_disjoint() {
        // Single-char table names tokenize away, leaving single-token names
        // with no shared characters and equal length.
        let a = col("x", "abcd");
        let b = col("y", "wxyz");
        let f = compute_pair_features(&a, &b);
        assert_eq!(f.name_jaccard, 0.0);
        assert_eq!(f.edit_distance_ratio, 1.0);
    }

    #[test]
    fn jaro_winkler_matches_the_reference_value() {
        let f = compute_pair_features(&col("x", "MARTHA"), &col("y", "MARHTA"));
        assert!((f.jaro_winkler - 0.9611).abs() < 1e-4);
    }

    #[test]
    fn tokens_split_on_underscores_camel_case_and_drop_single_chars() {
        let tokens = tokenize("orders.o_custKey");
        let expect: BTreeSet<String> =
            ["orders", "cust", "key"].iter().map(|s| s.to_string()).collect();
        assert_eq!(tokens, expect);
    }

    #[test]
    fn heuristic_formula_spot_values() {
        let mut f = PairFeatures {
            name_containment: 0.0,
            name_jaccard: 0.0,
            edit_distance_ratio: 1.0,
            jaro_winkler: 0.0,
            embedding_cosine: 0.0,
            type_match: false,
            cardinality_ratio: 1.0,
            null_ratio_i: 0.0,
            null_ratio_j: 0.0,
        };
        assert_eq!(heuristic_score(&f), 0.0);
        f.name_containment = 1.0;
        assert_eq!(heuristic_score(&f), 0.5);
    }

    #[test]
    fn features_are_symmetric_up_to_null_ratio_sides() {
        let mut a = col("orders", "o_custkey");
        let mut b = col("customer", "c_custkey");
        a.null_count = 10;
        b.null_count = 30;
        let fab = compute_pair_features(&a, &b);
        let fba = compute_pair_features(&b, &a);
        assert_eq!(fab.name_jaccard, fba.name_jaccard);
        assert_eq!(fab.name_containment, fba.name_containment);
        assert_eq!(fab.jaro_winkler, fba.jaro_winkler);
        assert_eq!(fab.embedding_cosine, fba.embedding_cosine);
        assert_eq!(fab.null_ratio_i, fba.null_ratio_j);
        assert_eq!(fab.null_ratio_j, fba.null_ratio_i);
        assert_eq!(heuristic_score(&fab), heuristic_score(&fba));
    }

    #[test]
    fn prediction_mapping_follows_the_confidence_table() {
        assert_eq!(prediction_score(true, ConfidenceLevel::High), 0.9);
        assert_eq!(prediction_score(true, ConfidenceLevel::Medium), 0.6);
        assert_eq!(prediction_score(true, ConfidenceLevel::Low), 0.1);
        assert!((prediction_score(false, ConfidenceLevel::High) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn score_file_defaults_and_validates() {
        let cols = vec![col("a", "x"), col("b", "y"), col("c", "z")];
        let index = build_column_index(&cols).unwrap();
        let dir = std::env::temp_dir().join(format!("nexus_scores_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scores.json");
        std::fs::write(&path, r#"{"a.x|b.y": 0.7, "ghost.q|b.y": 0.2}"#).unwrap();
        let (scores, ignored) = load_score_file(&path, &[(0, 1), (0, 2)], &index).unwrap();
        assert_eq!(scores[&(0, 1)], 0.7);
        assert_eq!(scores[&(0, 2)], 0.5); // defaulted
        assert_eq!(ignored, 1);

        std::fs::write(&path, r#"{"a.x|b.y": 1.3}"#).unwrap();
        assert!(matches!(load_score_file(&path, &[(0, 1)], &index), Err(Error::Range(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn llm_scoring_batches_and_maps_predictions() {
        let cols: Vec<ColumnMeta> = (0..5).map(|k| col("t", &format!("c{k}"))).collect();
        let mut renamed = cols.clone();
        for (k, c) in renamed.iter_mut().enumerate() {
            c.table_name = format!("t{k}");
        }
        let index = build_column_index(&renamed).unwrap();
        let mut mock = MockOracle::new();
        mock.predict_with("t0.c0", "t1.c1", true, ConfidenceLevel::High);
        mock.predict_with("t0.c0", "t2.c2", true, ConfidenceLevel::Medium);
        let pairs = vec![(0, 1), (0, 2), (0, 3), (0, 4)];
        let scores = llm_score_batch(&pairs, &index, &mock, 2).unwrap();
        assert_eq!(mock.predict_call_count(), 2);
        assert_eq!(scores[&(0, 1)], 0.9);
        assert_eq!(scores[&(0, 2)], 0.6);
        assert!((scores[&(0, 3)] - 0.1).abs() < 1e-12);

        // Batch partitioning does not change the result.
        let whole = llm_score_batch(&pairs, &index, &mock, 100).unwrap();
        assert_eq!(scores, whole);
    }

    #[test]
    fn fill_covers_all_latent_positions_and_rejects_certain_ones() {
        use crate::ingest::QueryLogJoin;
        use crate::model::{CandidatePair, Direction};
        use crate::prune::build_initial_mask;

        let survivors = vec![CandidatePair { i: 0, j: 2, direction: Direction::Unknown }];
        let known = vec![QueryLogJoin::new(1, 3)];
        let skeleton = build_initial_mask(4, &survivors, &known).unwrap();

        let mut scores = BTreeMap::new();
        scores.insert((0, 2), 0.7);
        let filled = fill_probability_matrix(&skeleton, &scores).unwrap();
        filled.validate().unwrap();
        assert_eq!(filled.matrix.get(0, 2), 0.7);
        assert_eq!(filled.matrix.get(2, 0), 0.7);

        // Missing survivor score.
        assert!(matches!(
            fill_probability_matrix(&skeleton, &BTreeMap::new()),
            Err(Error::IncompleteScores(1))
        ));

        // Score at a certain position.
        scores.insert((1, 3), 0.4);
        assert!(matches!(
            fill_probability_matrix(&skeleton, &scores),
            Err(Error::MaskViolation(_))
        ));

        // No survivors: skeleton passes through unchanged.
        let empty = build_initial_mask(3, &[], &[]).unwrap();
        let same = fill_probability_matrix(&empty, &BTreeMap::new()).unwrap();
        assert_eq!(same, empty);
    }

    proptest! {
        #[test]
        fn heuristic_is_monotone_in_each_feature(
            containment in 0.0f64..1.0,
            jaccard in 0.0f64..1.0,
            jw in 0.0f64..1.0,
            cos in -1.0f64..1.0,
            bump in 0.0f64..0.5,
        ) {
            let base = PairFeatures {
                name_containment: containment,
                name_jaccard: jaccard,
                edit_distance_ratio: 0.0,
                jaro_winkler: jw,
                embedding_cosine: cos,
                type_match: true,
                cardinality_ratio: 1.0,
                null_ratio_i: 0.0,
                null_ratio_j: 0.0,
            };
            let score = heuristic_score(&base);
            for field in 0..4 {
                let mut raised = base.clone();
                match field {
                    0 => raised.name_containment = (containment + bump).min(1.0),
                    1 => raised.name_jaccard = (jaccard + bump).min(1.0),
                    2 => raised.jaro_winkler = (jw + bump).min(1.0),
                    _ => raised.embedding_cosine = (cos + bump).min(1.0),
                }
                prop_assert!(heuristic_score(&raised) >= score - 1e-12);
            }
        }
    }
}

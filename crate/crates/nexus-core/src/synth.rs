//! Seeded generator of synthetic relational schemas with known join graphs:
//! entity tables with unique primary keys, foreign keys referencing them,
//! filler columns of varying joinability, a truthful mock oracle, and
//! synthetic prior scores with controllable noise.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::ingest::GroundTruth;
use crate::model::{build_column_index, ColumnIndex, ColumnMeta, DataType};
use crate::oracle::MockOracle;

const ENTITY_POOL: &[&str] = &[
    "customer", "supplier", "product", "order", "invoice", "payment", "shipment", "employee",
    "department", "account", "region", "warehouse", "category", "vendor", "contract", "ticket",
    "asset", "project", "campaign", "store", "courier", "manifest", "voucher", "coupon", "refund",
    "carrier", "terminal", "license", "partner", "merchant", "catalog", "bundle", "segment",
    "channel", "audit", "budget", "ledger", "branch", "policy", "claim",
];

const INT_FILLER_POOL: &[&str] = &[
    "quantity", "status_code", "priority", "retry_count", "batch_no", "version", "tier", "slot",
];

const TEXT_FILLER_POOL: &[&str] = &["notes", "label", "remarks", "description", "alias"];

const EXCLUDED_FILLER_POOL: &[(&str, DataType)] = &[
    ("score_ratio", DataType::Float),
    ("active_flag", DataType::Boolean),
    ("payload", DataType::Blob),
    ("config_doc", DataType::Json),
    ("margin_pct", DataType::Decimal),
    ("scale_factor", DataType::Double),
];

const FK_NAME_VARIANTS: &[&str] = &["{e}_id", "{e}Id", "{e}_key", "{e}_ref"];

/// Shape of a generated schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub tables: usize,
    /// Each table references between 1 and this many other tables.
    pub max_fks_per_table: usize,
    /// Non-unique INTEGER columns that survive pruning against primary keys.
    pub int_fillers_per_table: usize,
    /// VARCHAR columns; never joinable here, so they become all-zero rows.
    pub text_fillers_per_table: usize,
    /// Columns of non-joinable types (FLOAT, BOOLEAN, …), also all-zero rows.
    pub excluded_fillers_per_table: usize,
    /// Inclusive row-count range tables draw from.
    pub rows: (u64, u64),
    pub seed: u64,
}

impl SynthConfig {
    /// A desk-scale schema: 6 tables, 36–42 columns.
    pub fn small(seed: u64) -> Self {
        SynthConfig {
            tables: 6,
            max_fks_per_table: 2,
            int_fillers_per_table: 2,
            text_fillers_per_table: 1,
            excluded_fillers_per_table: 1,
            rows: (500, 5000),
            seed,
        }
    }

    /// A wide schema of at least 300 columns across 30 tables.
    pub fn large(seed: u64) -> Self {
        SynthConfig {
            tables: 30,
            max_fks_per_table: 2,
            int_fillers_per_table: 3,
            text_fillers_per_table: 2,
            excluded_fillers_per_table: 3,
            rows: (500, 5000),
            seed,
        }
    }
}

/// A generated schema with its ground truth and a truthful oracle.
#[derive(Debug)]
pub struct SynthInstance {
    pub columns: Vec<ColumnMeta>,
    pub index: ColumnIndex,
    pub truth: GroundTruth,
    pub oracle: MockOracle,
}

fn filler_name(pool: &[&str], k: usize) -> String {
    if k < pool.len() {
        pool[k].to_string()
    } else {
        format!("{}_{}", pool[k % pool.len()], k / pool.len())
    }
}

/// Generates a schema deterministically from `cfg.seed`. Every foreign key
/// points at another table's primary key; those pairs form the ground truth.
/// The oracle annotates keys with their entity ("customer identifier") and
/// fillers with per-column junk types.
pub fn generate(cfg: &SynthConfig) -> Result<SynthInstance, Error> {
    if cfg.tables < 2 || cfg.tables > ENTITY_POOL.len() {
        return Err(Error::Range(format!(
            "table count {} outside [2, {}]",
            cfg.tables,
            ENTITY_POOL.len()
        )));
    }
    if cfg.rows.0 < 300 || cfg.rows.1 < cfg.rows.0 {
        return Err(Error::Range(
            "row range must satisfy 300 <= lo <= hi (fillers assume wide key domains)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut entities: Vec<&str> = ENTITY_POOL.to_vec();
    entities.shuffle(&mut rng);
    entities.truncate(cfg.tables);

    let rows: Vec<u64> =
        (0..cfg.tables).map(|_| rng.random_range(cfg.rows.0..=cfg.rows.1)).collect();

    let mut columns = Vec::new();
    let mut oracle = MockOracle::new();
    let mut fk_refs: Vec<(String, String, usize)> = Vec::new(); // (table, fk column, target)

    for (t, &entity) in entities.iter().enumerate() {
        let table = entity.to_string();
        let n_rows = rows[t];

        let pk = format!("{entity}_id");
        columns.push(ColumnMeta {
            table_name: table.clone(),
            column_name: pk.clone(),
            data_type: DataType::Bigint,
            row_count: n_rows,
            distinct_count: Some(n_rows),
            null_count: 0,
            min_value: Some("1".into()),
            max_value: Some(n_rows.to_string()),
        });
        oracle.annotate_with(&table, &pk, &format!("{entity} identifier"));

        let fk_count = rng.random_range(1..=cfg.max_fks_per_table.max(1)).min(cfg.tables - 1);
        let mut targets: Vec<usize> = (0..cfg.tables).filter(|&x| x != t).collect();
        targets.shuffle(&mut rng);
        targets.truncate(fk_count);
        for target in targets {
            let target_entity = entities[target];
            let variant = FK_NAME_VARIANTS[rng.random_range(0..FK_NAME_VARIANTS.len())];
            let fk = variant.replace("{e}", target_entity);
            let target_rows = rows[target];
            let nulls = rng.random_range(0..=n_rows / 20);
            let ceiling = (n_rows - nulls).saturating_sub(1).min(target_rows);
            let distinct = rng.random_range(ceiling / 2..=ceiling).max(1);
            columns.push(ColumnMeta {
                table_name: table.clone(),
                column_name: fk.clone(),
                data_type: DataType::Bigint,
                row_count: n_rows,
                distinct_count: Some(distinct),
                null_count: nulls,
                min_value: Some("1".into()),
                max_value: Some(target_rows.to_string()),
            });
            oracle.annotate_with(&table, &fk, &format!("{target_entity} identifier"));
            fk_refs.push((table.clone(), fk, target));
        }

        for k in 0..cfg.int_fillers_per_table {
            let name = filler_name(INT_FILLER_POOL, k);
            let distinct = rng.random_range(20..=200);
            columns.push(ColumnMeta {
                table_name: table.clone(),
                column_name: name.clone(),
                data_type: DataType::Integer,
                row_count: n_rows,
                distinct_count: Some(distinct),
                null_count: rng.random_range(0..=n_rows / 20),
                min_value: Some("1".into()),
                max_value: Some("250".into()),
            });
            oracle.annotate_with(&table, &name, &format!("{table} {name} attribute"));
        }
        for k in 0..cfg.text_fillers_per_table {
            let name = filler_name(TEXT_FILLER_POOL, k);
            columns.push(ColumnMeta {
                table_name: table.clone(),
                column_name: name.clone(),
                data_type: DataType::Varchar,
                row_count: n_rows,
                distinct_count: Some(rng.random_range(2..=n_rows / 4)),
                null_count: rng.random_range(0..=n_rows / 10),
                min_value: None,
                max_value: None,
            });
            oracle.annotate_with(&table, &name, &format!("{table} {name} attribute"));
        }
        for k in 0..cfg.excluded_fillers_per_table {
            let (base, dt) = EXCLUDED_FILLER_POOL[k % EXCLUDED_FILLER_POOL.len()];
            let name = if k < EXCLUDED_FILLER_POOL.len() {
                base.to_string()
            } else {
                format!("{}_{}", base, k / EXCLUDED_FILLER_POOL.len())
            };
            columns.push(ColumnMeta {
                table_name: table.clone(),
                column_name: name.clone(),
                data_type: dt,
                row_count: n_rows,
                distinct_count: Some(rng.random_range(2..=n_rows.max(3) / 2)),
                null_count: rng.random_range(0..=n_rows / 10),
                min_value: None,
                max_value: None,
            });
            oracle.annotate_with(&table, &name, &format!("{table} {name} attribute"));
        }
    }

    let index = build_column_index(&columns)?;
    let truth = GroundTruth::from_pairs(fk_refs.iter().map(|(table, fk, target)| {
        let fk_idx = index
            .resolve_qualified(&format!("{table}.{fk}"))
            .expect("generated column present");
        let pk_idx = index
            .resolve_qualified(&format!("{e}.{e}_id", e = entities[*target]))
            .expect("generated key present");
        (fk_idx, pk_idx)
    }));

    Ok(SynthInstance { columns, index, truth, oracle })
}

/// Synthetic prior scores for the surviving candidates: true pairs score in
/// [0.86, 0.95], false pairs in [0.06, 0.25].
pub fn survivor_scores(
    instance: &SynthInstance,
    survivors: &[crate::model::CandidatePair],
    seed: u64,
) -> BTreeMap<(usize, usize), f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    survivors
        .iter()
        .map(|pair| {
            let key = (pair.i, pair.j);
            let score = if instance.truth.edges.contains(&key) {
                rng.random_range(0.86..=0.95)
            } else {
                rng.random_range(0.06..=0.25)
            };
            (key, score)
        })
        .collect()
}

/// Flips `round(fraction · len)` scores to their complement 1 − s, chosen by
/// a seeded shuffle. Returns how many were flipped.
pub fn flip_scores(
    scores: &mut BTreeMap<(usize, usize), f64>,
    fraction: f64,
    seed: u64,
) -> Result<usize, Error> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Range(format!("noise fraction {fraction} outside [0,1]")));
    }
    let mut keys: Vec<(usize, usize)> = scores.keys().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    keys.shuffle(&mut rng);
    let take = (fraction * keys.len() as f64).round() as usize;
    for key in &keys[..take] {
        let v = scores[key];
        scores.insert(*key, 1.0 - v);
    }
    Ok(take)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrmc::extract_core;
    use crate::oracle::SemanticOracle;
    use crate::prune::{build_initial_mask, filter_joinable_columns, prune_pairs};
    use crate::score::fill_probability_matrix;

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&SynthConfig::small(7)).unwrap();
        let b = generate(&SynthConfig::small(7)).unwrap();
        assert_eq!(a.columns, b.columns);
        assert_eq!(a.truth.edges, b.truth.edges);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&SynthConfig::small(7)).unwrap();
        let b = generate(&SynthConfig::small(8)).unwrap();
        assert_ne!(a.columns, b.columns);
    }

    #[test]
    fn all_generated_columns_validate() {
        let inst = generate(&SynthConfig::small(3)).unwrap();
        for c in &inst.columns {
            c.validate().unwrap();
        }
    }

    #[test]
    fn every_truth_edge_survives_pruning() {
        for seed in 0..5 {
            let inst = generate(&SynthConfig::small(seed)).unwrap();
            let eligible = filter_joinable_columns(&inst.columns);
            let report = prune_pairs(&inst.columns, &eligible);
            let survivors: std::collections::BTreeSet<(usize, usize)> =
                report.survivors.iter().map(|p| (p.i, p.j)).collect();
            for edge in &inst.truth.edges {
                assert!(survivors.contains(edge), "truth edge {edge:?} was pruned");
            }
            // The suite needs plenty of false candidates too.
            assert!(survivors.len() >= 2 * inst.truth.edges.len());
        }
    }

    #[test]
    fn large_config_reaches_three_hundred_columns() {
        let inst = generate(&SynthConfig::large(1)).unwrap();
        assert!(inst.columns.len() >= 300, "got {}", inst.columns.len());
    }

    #[test]
    fn oracle_annotates_every_column() {
        let inst = generate(&SynthConfig::small(5)).unwrap();
        let refs: Vec<crate::oracle::ColumnRef> = inst
            .columns
            .iter()
            .map(|c| crate::oracle::ColumnRef::new(c.table_name.clone(), c.column_name.clone()))
            .collect();
        let types = inst.oracle.annotate(&refs).unwrap();
        assert!(types.iter().all(|t| !t.trim().is_empty()));
    }

    #[test]
    fn scores_cover_exactly_the_survivors_and_separate_truth() {
        let inst = generate(&SynthConfig::small(2)).unwrap();
        let eligible = filter_joinable_columns(&inst.columns);
        let report = prune_pairs(&inst.columns, &eligible);
        let scores = survivor_scores(&inst, &report.survivors, 99);
        assert_eq!(scores.len(), report.survivors.len());
        for (key, score) in &scores {
            if inst.truth.edges.contains(key) {
                assert!(*score >= 0.86);
            } else {
                assert!(*score <= 0.25);
            }
        }
    }

    #[test]
    fn flipping_is_seeded_and_complements_scores() {
        let inst = generate(&SynthConfig::small(2)).unwrap();
        let eligible = filter_joinable_columns(&inst.columns);
        let report = prune_pairs(&inst.columns, &eligible);
        let clean = survivor_scores(&inst, &report.survivors, 99);

        let mut noisy_a = clean.clone();
        let flipped_a = flip_scores(&mut noisy_a, 0.3, 123).unwrap();
        let mut noisy_b = clean.clone();
        let flipped_b = flip_scores(&mut noisy_b, 0.3, 123).unwrap();
        assert_eq!(noisy_a, noisy_b);
        assert_eq!(flipped_a, flipped_b);
        assert_eq!(flipped_a, (0.3 * clean.len() as f64).round() as usize);

        let changed = clean.iter().filter(|(k, v)| noisy_a[k] != **v).count();
        assert_eq!(changed, flipped_a);
        for (k, v) in &clean {
            if noisy_a[k] != *v {
                assert_eq!(noisy_a[k], 1.0 - *v);
            }
        }
    }

    #[test]
    fn text_and_excluded_fillers_shrink_the_core() {
        let inst = generate(&SynthConfig::small(4)).unwrap();
        let n = inst.columns.len();
        let eligible = filter_joinable_columns(&inst.columns);
        let report = prune_pairs(&inst.columns, &eligible);
        let skeleton = build_initial_mask(n, &report.survivors, &[]).unwrap();
        let scores = survivor_scores(&inst, &report.survivors, 1);
        let filled = fill_probability_matrix(&skeleton, &scores).unwrap();
        let (core, idx) = extract_core(&filled);
        assert!(core.matrix.n() < n, "core {} should shrink below {n}", core.matrix.n());
        // At minimum the text and excluded fillers drop out.
        let cfg = SynthConfig::small(4);
        let dropped = cfg.tables * (cfg.text_fillers_per_table + cfg.excluded_fillers_per_table);
        assert!(idx.n_prime() <= n - dropped);
    }
}

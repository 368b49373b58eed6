//! Exhaustive threshold sweep with Pareto-front selection, and k-fold
//! cross-validation of the selected configurations.

use super::{bcdf, ModelConfig};
use crate::miner::{CountTable, PairKey};
use crate::validation::{precision_recall_sets, KnownLabel, LabelSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("label set contains no incorrect pairs; precision/recall undefined")]
    EmptyLabelSet,
    #[error("no configuration flags any labeled pair; optimum undefined")]
    NoDefinedPrecision,
    #[error("cross-validation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("threshold grids must be non-empty")]
    EmptyGrid,
}

/// Outcome of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub config: ModelConfig,
    /// Undefined (None) when no labeled pair was classified anomalous.
    pub precision: Option<f64>,
    pub recall: f64,
    /// Anomalous pairs across the whole table, labeled or not.
    pub anomalous_count: u64,
    pub true_positives: u64,
    pub flagged_labeled: u64,
}

/// All evaluated configurations, the Pareto front over (precision, recall),
/// and the selected optimum.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// One point per configuration, in lexicographic configuration order.
    pub points: Vec<SweepPoint>,
    /// Indices into `points`; no member is dominated by any other point.
    pub pareto: Vec<usize>,
    /// Index of the optimum: highest recall at the highest available
    /// precision, ties broken toward the lexicographically smallest
    /// configuration.
    pub optimal: usize,
}

impl SweepResult {
    pub fn optimal_point(&self) -> &SweepPoint {
        &self.points[self.optimal]
    }
}

struct PairEval {
    /// BCDF(k, n_path, r) per rarity grid entry.
    path_bcdf: Vec<f64>,
    /// BCDF(k, n_prop, r) per rarity grid entry.
    prop_bcdf: Vec<f64>,
    label: Option<KnownLabel>,
}

fn sorted_grid(grid: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Evaluates every configuration in the cross product of the grids
/// (rarity² × confidence²). Pairs with excluded properties are never
/// anomalous. Precision and recall are computed against `labels`;
/// unlabeled pairs count only toward `anomalous_count`.
pub fn sweep(
    table: &CountTable,
    labels: &LabelSet,
    rarity_grid: &[f64],
    confidence_grid: &[f64],
    excluded_props: &BTreeSet<String>,
) -> Result<SweepResult, SweepError> {
    let rarity = sorted_grid(rarity_grid);
    let confidence = sorted_grid(confidence_grid);
    if rarity.is_empty() || confidence.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let incorrect_total = labels.incorrect_count();
    if incorrect_total == 0 {
        return Err(SweepError::EmptyLabelSet);
    }

    let pairs: Vec<PairEval> = table
        .pairs()
        .filter(|(key, _)| !excluded_props.contains(&key.prop))
        .map(|(key, k)| {
            let n_path = table.path_total(&key.path);
            let n_prop = table.prop_total(&key.prop);
            PairEval {
                path_bcdf: rarity
                    .iter()
                    .map(|&r| bcdf(k, n_path, r).expect("table counts in domain"))
                    .collect(),
                prop_bcdf: rarity
                    .iter()
                    .map(|&r| bcdf(k, n_prop, r).expect("table counts in domain"))
                    .collect(),
                label: labels.get(key),
            }
        })
        .collect();

    // configuration axes in lexicographic (p_a, p_prop, p_ca, p_cprop) order
    let mut configs: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (ia, _) in rarity.iter().enumerate() {
        for (ip, _) in rarity.iter().enumerate() {
            for &p_ca in &confidence {
                for &p_cprop in &confidence {
                    configs.push((ia, ip, p_ca, p_cprop));
                }
            }
        }
    }

    let points: Vec<SweepPoint> = configs
        .par_iter()
        .map(|&(ia, ip, p_ca, p_cprop)| {
            let mut anomalous_count = 0u64;
            let mut true_positives = 0u64;
            let mut flagged_labeled = 0u64;
            for pair in &pairs {
                let anomalous = pair.path_bcdf[ip] < p_cprop && pair.prop_bcdf[ia] < p_ca;
                if !anomalous {
                    continue;
                }
                anomalous_count += 1;
                match pair.label {
                    Some(KnownLabel::Incorrect) => {
                        true_positives += 1;
                        flagged_labeled += 1;
                    }
                    Some(KnownLabel::Correct) => flagged_labeled += 1,
                    None => {}
                }
            }
            SweepPoint {
                config: ModelConfig::new(rarity[ia], rarity[ip], p_ca, p_cprop),
                precision: (flagged_labeled > 0)
                    .then(|| true_positives as f64 / flagged_labeled as f64),
                recall: true_positives as f64 / incorrect_total as f64,
                anomalous_count,
                true_positives,
                flagged_labeled,
            }
        })
        .collect();

    let optimal = select_optimal(&points).ok_or(SweepError::NoDefinedPrecision)?;
    let pareto = pareto_front(&points);
    Ok(SweepResult {
        points,
        pareto,
        optimal,
    })
}

/// Highest recall at the highest available precision; configs with
/// undefined precision are not eligible.
pub(crate) fn select_optimal(points: &[SweepPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        let Some(prec) = p.precision else { continue };
        match best {
            None => best = Some(i),
            Some(b) => {
                let bp = points[b].precision.expect("best has defined precision");
                let better = match prec.total_cmp(&bp) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        match p.recall.total_cmp(&points[b].recall) {
                            std::cmp::Ordering::Greater => true,
                            std::cmp::Ordering::Less => false,
                            // equal precision and recall: keep the
                            // lexicographically smallest configuration
                            std::cmp::Ordering::Equal => {
                                p.config.lex_cmp(&points[b].config).is_lt()
                            }
                        }
                    }
                };
                if better {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// Indices of points not dominated in (precision, recall). A point
/// dominates another when it is at least as good in both measures and
/// strictly better in one. Undefined-precision points are excluded.
pub(crate) fn pareto_front(points: &[SweepPoint]) -> Vec<usize> {
    let defined: Vec<(usize, f64, f64)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.precision.map(|prec| (i, prec, p.recall)))
        .collect();
    let mut front: Vec<usize> = defined
        .iter()
        .filter(|(_, prec, rec)| {
            !defined.iter().any(|(_, p2, r2)| {
                (*p2 >= *prec && *r2 > *rec) || (*p2 > *prec && *r2 >= *rec)
            })
        })
        .map(|(i, _, _)| *i)
        .collect();
    front.sort_by(|&a, &b| {
        let pa = points[a].precision.unwrap();
        let pb = points[b].precision.unwrap();
        pb.total_cmp(&pa)
            .then(points[b].recall.total_cmp(&points[a].recall))
            .then(points[a].config.lex_cmp(&points[b].config))
    });
    front
}

/// One row of the cross-validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub config: ModelConfig,
    pub train_precision: f64,
    pub train_recall: f64,
    pub validation_precision: Option<f64>,
    pub validation_recall: Option<f64>,
}

/// Standard k-fold cross-validation: labeled pairs are partitioned with a
/// seeded shuffle; per fold, the optimum is selected on the remaining
/// labels and evaluated on the held-out ones. Deterministic for a fixed
/// seed.
pub fn cross_validate(
    table: &CountTable,
    labels: &LabelSet,
    folds: usize,
    seed: u64,
    rarity_grid: &[f64],
    confidence_grid: &[f64],
    excluded_props: &BTreeSet<String>,
) -> Result<Vec<FoldOutcome>, SweepError> {
    if folds < 2 {
        return Err(SweepError::TooFewFolds(folds));
    }
    if labels.incorrect_count() == 0 {
        return Err(SweepError::EmptyLabelSet);
    }
    let mut keys: Vec<PairKey> = labels.iter().map(|(k, _)| k.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    keys.shuffle(&mut rng);
    let mut fold_keys: Vec<BTreeSet<PairKey>> = vec![BTreeSet::new(); folds];
    for (i, key) in keys.into_iter().enumerate() {
        fold_keys[i % folds].insert(key);
    }

    let mut outcomes = Vec::with_capacity(folds);
    for (fold, held_out) in fold_keys.iter().enumerate() {
        let train = labels.without(held_out);
        let validation = labels.restricted_to(held_out);
        let result = sweep(table, &train, rarity_grid, confidence_grid, excluded_props)?;
        let best = result.optimal_point();

        let anomalous = super::anomalous_pairs(table, &best.config, excluded_props);
        let eval = precision_recall_sets(&anomalous, &validation);
        outcomes.push(FoldOutcome {
            fold,
            config: best.config,
            train_precision: best.precision.expect("optimum has defined precision"),
            train_recall: best.recall,
            validation_precision: eval.precision(),
            validation_recall: eval.recall(),
        });
    }
    Ok(outcomes)
}

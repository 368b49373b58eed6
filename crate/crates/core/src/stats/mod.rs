//! The statistical model: pairs are anomalous when the property is rare
//! for the path and the path is rare for the property, both judged by
//! binomial-CDF tests against configurable rarity and confidence
//! thresholds.

mod bcdf;
mod sweep;

pub use bcdf::{bcdf, DomainError};
pub use sweep::{
    cross_validate, sweep, FoldOutcome, SweepError, SweepPoint, SweepResult,
};

use crate::miner::{CountTable, PairKey};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// The four thresholds of the model, all probabilities in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Rarity threshold for an access path being rare for a property.
    pub p_a: f64,
    /// Rarity threshold for a property being rare for an access path.
    pub p_prop: f64,
    /// Confidence threshold paired with `p_a`.
    pub p_ca: f64,
    /// Confidence threshold paired with `p_prop`.
    pub p_cprop: f64,
}

impl ModelConfig {
    pub fn new(p_a: f64, p_prop: f64, p_ca: f64, p_cprop: f64) -> Self {
        Self {
            p_a,
            p_prop,
            p_ca,
            p_cprop,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("p_a", self.p_a),
            ("p_prop", self.p_prop),
            ("p_ca", self.p_ca),
            ("p_cprop", self.p_cprop),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} = {v} outside (0, 1]"));
            }
        }
        Ok(())
    }

    fn lex_key(&self) -> [f64; 4] {
        [self.p_a, self.p_prop, self.p_ca, self.p_cprop]
    }

    /// Total order over the (p_a, p_prop, p_ca, p_cprop) tuple, used for
    /// deterministic tie-breaking.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.lex_key();
        let b = other.lex_key();
        for i in 0..4 {
            match a[i].total_cmp(&b[i]) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Precision-first defaults from large-corpus threshold tuning.
impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::new(0.005, 0.02, 0.005, 0.005)
    }
}

/// Rarity threshold choices explored by the exhaustive sweep.
pub const DEFAULT_RARITY_GRID: [f64; 8] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.25];
/// Confidence threshold choices explored by the exhaustive sweep.
pub const DEFAULT_CONFIDENCE_GRID: [f64; 8] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 1.0];

/// Pairs need at least this many occurrences to count as expected usage.
pub const DEFAULT_MIN_SUPPORT: u64 = 5;

/// Properties inherited from `Object.prototype`; rarity on a particular
/// path says nothing useful about them, so they are excluded up front.
pub const DEFAULT_EXCLUDED_PROPS: [&str; 8] = [
    "toString",
    "toLocaleString",
    "valueOf",
    "hasOwnProperty",
    "isPrototypeOf",
    "propertyIsEnumerable",
    "constructor",
    "__proto__",
];

pub fn default_excluded_props() -> BTreeSet<String> {
    DEFAULT_EXCLUDED_PROPS.iter().map(|s| s.to_string()).collect()
}

/// Counts behind one pair: k occurrences of the pair, n_path observations
/// on the path, n_prop observations of the property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairStats {
    pub k: u64,
    pub n_path: u64,
    pub n_prop: u64,
}

impl PairStats {
    pub fn new(k: u64, n_path: u64, n_prop: u64) -> Self {
        debug_assert!(k >= 1 && k <= n_path.min(n_prop), "inconsistent pair stats");
        Self { k, n_path, n_prop }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Expected,
    Anomalous,
    Unknown,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Expected => "expected",
            Classification::Anomalous => "anomalous",
            Classification::Unknown => "unknown",
        })
    }
}

/// Classifies one pair. Anomalous requires both rarity conditions
/// (strict comparisons); expected requires neither condition and at least
/// `min_support` occurrences; everything else is unknown.
pub fn classify_pair(stats: &PairStats, cfg: &ModelConfig, min_support: u64) -> Classification {
    let rare_for_path =
        bcdf(stats.k, stats.n_path, cfg.p_prop).expect("pair stats in domain") < cfg.p_cprop;
    let rare_for_prop =
        bcdf(stats.k, stats.n_prop, cfg.p_a).expect("pair stats in domain") < cfg.p_ca;
    if rare_for_path && rare_for_prop {
        Classification::Anomalous
    } else if !rare_for_path && !rare_for_prop && stats.k >= min_support {
        Classification::Expected
    } else {
        Classification::Unknown
    }
}

/// Classifies every pair of a table. Pairs whose property is excluded are
/// unknown regardless of counts.
pub fn classify_all(
    table: &CountTable,
    cfg: &ModelConfig,
    min_support: u64,
    excluded_props: &BTreeSet<String>,
) -> BTreeMap<PairKey, Classification> {
    table
        .pairs()
        .map(|(key, k)| {
            let class = if excluded_props.contains(&key.prop) {
                Classification::Unknown
            } else {
                let stats = PairStats::new(k, table.path_total(&key.path), table.prop_total(&key.prop));
                classify_pair(&stats, cfg, min_support)
            };
            (key.clone(), class)
        })
        .collect()
}

/// The anomalous subset of [`classify_all`].
pub fn anomalous_pairs(
    table: &CountTable,
    cfg: &ModelConfig,
    excluded_props: &BTreeSet<String>,
) -> BTreeSet<PairKey> {
    classify_all(table, cfg, DEFAULT_MIN_SUPPORT, excluded_props)
        .into_iter()
        .filter(|(_, c)| *c == Classification::Anomalous)
        .map(|(k, _)| k)
        .collect()
}

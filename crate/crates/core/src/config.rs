//! Run configuration: thresholds, grids, exclusions, tracking, and
//! execution knobs. Loadable from a TOML file that overrides command-line
//! flags.

use crate::access_paths::InferOptions;
use crate::checker::CheckOptions;
use crate::frontend::ParseOptions;
use crate::stats::{
    ModelConfig, DEFAULT_CONFIDENCE_GRID, DEFAULT_EXCLUDED_PROPS, DEFAULT_MIN_SUPPORT,
    DEFAULT_RARITY_GRID,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub thresholds: ModelConfig,
    pub min_support: u64,
    pub excluded_props: Vec<String>,
    pub seed: u64,
    pub folds: usize,
    /// 0 selects the rayon default.
    pub workers: usize,
    pub rarity_grid: Vec<f64>,
    pub confidence_grid: Vec<f64>,
    /// Modules whose imports are tracked; absent means all modules.
    pub tracked_modules: Option<Vec<String>>,
    pub track_builtins: bool,
    pub path_cap: usize,
    pub lenient_types: bool,
    pub h2_typeof: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            thresholds: ModelConfig::default(),
            min_support: DEFAULT_MIN_SUPPORT,
            excluded_props: DEFAULT_EXCLUDED_PROPS.iter().map(|s| s.to_string()).collect(),
            seed: 42,
            folds: 10,
            workers: 0,
            rarity_grid: DEFAULT_RARITY_GRID.to_vec(),
            confidence_grid: DEFAULT_CONFIDENCE_GRID.to_vec(),
            tracked_modules: None,
            track_builtins: true,
            path_cap: 16,
            lenient_types: false,
            h2_typeof: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config file: {0}")]
    Toml(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Toml(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate().map_err(ConfigError::Invalid)?;
        for (name, grid) in [
            ("rarity_grid", &self.rarity_grid),
            ("confidence_grid", &self.confidence_grid),
        ] {
            if grid.is_empty() {
                return Err(ConfigError::Invalid(format!("{name} is empty")));
            }
            for &v in grid {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(ConfigError::Invalid(format!(
                        "{name} entry {v} outside (0, 1]"
                    )));
                }
            }
        }
        if self.folds < 2 {
            return Err(ConfigError::Invalid(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        if self.path_cap == 0 {
            return Err(ConfigError::Invalid("path_cap must be >= 1".to_string()));
        }
        if self.min_support == 0 {
            return Err(ConfigError::Invalid("min_support must be >= 1".to_string()));
        }
        Ok(())
    }

    pub fn excluded_set(&self) -> BTreeSet<String> {
        self.excluded_props.iter().cloned().collect()
    }

    pub fn infer_options(&self) -> InferOptions {
        InferOptions {
            tracked_modules: self
                .tracked_modules
                .as_ref()
                .map(|v| v.iter().cloned().collect()),
            track_builtins: self.track_builtins,
            path_cap: self.path_cap,
        }
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            lenient_types: self.lenient_types,
        }
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            parse: self.parse_options(),
            infer: self.infer_options(),
            h2_typeof: self.h2_typeof,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_the_tuned_optimum() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.thresholds, ModelConfig::new(0.005, 0.02, 0.005, 0.005));
        assert_eq!(config.rarity_grid.len() * config.confidence_grid.len(), 64);
        assert!(config.excluded_props.contains(&"toString".to_string()));
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let text = r#"
            min_support = 3
            seed = 9
            tracked_modules = ["fs", "path"]

            [thresholds]
            p_a = 0.01
            p_prop = 0.02
            p_ca = 0.03
            p_cprop = 0.04
        "#;
        let config: RunConfig = toml::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.min_support, 3);
        assert_eq!(config.thresholds.p_ca, 0.03);
        assert_eq!(
            config.tracked_modules,
            Some(vec!["fs".to_string(), "path".to_string()])
        );
        // unspecified fields keep defaults
        assert_eq!(config.folds, 10);

        let bad: RunConfig = toml::from_str("[thresholds]\np_a = 1.5\np_prop = 0.1\np_ca = 0.1\np_cprop = 0.1").unwrap();
        assert!(bad.validate().is_err());
    }
}

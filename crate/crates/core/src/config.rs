//! Run configuration, stored as TOML next to every run's outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::DEFAULT_DROPOUT_RATE;
use crate::train::TrainConfig;
use crate::transfer::{StrategyKind, DEFAULT_GROWTH_JITTER};

/// Overrides the output directory of every command when set.
pub const OUT_DIR_ENV: &str = "MDN_INVERSE_OUT_DIR";

pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: PathBuf,
    /// Components for a single training run.
    pub k: usize,
    /// Largest component count of a sweep.
    pub k_max: usize,
    pub strategy: StrategyKind,
    pub use_autoencoder: bool,
    /// Reuse this trained autoencoder instead of training one.
    pub autoencoder_path: Option<PathBuf>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub dropout_rate: f64,
    pub growth_jitter: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            seed: 0,
            dataset: PathBuf::from("data/dataset.csv"),
            k: 1,
            k_max: 10,
            strategy: StrategyKind::None,
            use_autoencoder: false,
            autoencoder_path: None,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            max_epochs: t.max_epochs,
            patience: t.patience,
            min_delta: t.min_delta,
            dropout_rate: DEFAULT_DROPOUT_RATE,
            growth_jitter: DEFAULT_GROWTH_JITTER,
            out_dir: PathBuf::from("runs/latest"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map(|s| line_of(&text, s.start)).unwrap_or(0),
            msg: e.message().to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            patience: self.patience,
            min_delta: self.min_delta,
        }
    }

    /// Applies the output-directory environment override.
    pub fn with_env(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.out_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Argument(m.to_string()));
        if self.k == 0 || self.k_max == 0 {
            return bad("k and k_max must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        if !(self.growth_jitter >= 0.0) || !(self.min_delta >= 0.0) {
            return bad("growth_jitter and min_delta must be non-negative");
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> u64 {
    text[..offset.min(text.len())].matches('\n').count() as u64 + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig {
            strategy: StrategyKind::Tl1,
            autoencoder_path: Some("ae.json".into()),
            ..RunConfig::default()
        };
        let back: RunConfig = toml::from_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c: RunConfig = toml::from_str("seed = 5\nstrategy = \"tl2\"\n").unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.strategy, StrategyKind::Tl2);
        assert_eq!(c.learning_rate, 1e-3);
        assert_eq!(c.max_epochs, 1000);
        assert_eq!(c.batch_size, 64);
    }

    #[test]
    fn unknown_key_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "seed = 1\nbogus = 2\n").unwrap();
        match RunConfig::load(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}

//! Experiment configuration.
//!
//! A single flat key-value file (TOML syntax, dotted keys for the optimizer
//! and trading sections). Relative paths resolve against the file's
//! directory. CLI flags override individual keys.
//!
//! ```toml
//! base_seed = 1
//! runs = 30
//! metadata = "stocks.csv"
//! quotes_dir = "quotes"
//! out = "out"
//! rprop.max_iterations = 3000
//! trading.grid_max = 0.02
//! trading.grid_step = 0.0005
//! trading.initial_position = "long"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rprop::RpropConfig;
use crate::trading::{threshold_grid, Position};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradingConfig {
    pub grid_max: f64,
    pub grid_step: f64,
    #[serde(deserialize_with = "de_position")]
    pub initial_position: Position,
}

fn de_position<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Position, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Int(i64),
    }
    let text = match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Int(i) => i.to_string(),
    };
    text.parse().map_err(serde::de::Error::custom)
}

impl Default for TradingConfig {
    fn default() -> Self {
        Self { grid_max: 0.02, grid_step: 0.0005, initial_position: Position::Long }
    }
}

impl TradingConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        threshold_grid(self.grid_max, self.grid_step)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_seed: u64,
    pub runs: usize,
    /// Worker threads; 0 uses every available core. Output does not depend
    /// on this value.
    pub threads: usize,
    pub metadata: PathBuf,
    pub quotes_dir: PathBuf,
    pub out: PathBuf,
    pub rprop: RpropConfig,
    pub trading: TradingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            base_seed: 1,
            runs: 30,
            threads: 0,
            metadata: PathBuf::from("stocks.csv"),
            quotes_dir: PathBuf::from("quotes"),
            out: PathBuf::from("out"),
            rprop: RpropConfig::default(),
            trading: TradingConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Config(format!("config file {} does not exist", path.display())),
            _ => Error::io(format!("reading {}", path.display()), e),
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.metadata, &mut cfg.quotes_dir, &mut cfg.out] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Checks everything except the output directory, which is created on
    /// demand.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        self.rprop.validate()?;
        self.trading.grid()?;
        if !self.metadata.is_file() {
            return Err(Error::Config(format!("metadata file {} does not exist", self.metadata.display())));
        }
        if !self.quotes_dir.is_dir() {
            return Err(Error::Config(format!("quotes directory {} does not exist", self.quotes_dir.display())));
        }
        Ok(())
    }

    pub fn quote_path(&self, ticker: &str) -> PathBuf {
        self.quotes_dir.join(format!("{ticker}.csv"))
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

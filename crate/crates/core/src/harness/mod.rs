//! Experiment orchestration.
//!
//! Every (stock, run) pair is an independent job: run `r` seeds its weight
//! initialization with `base_seed + r`, trains on the shared training half,
//! picks the band and scores the test half. Jobs fan out over a worker pool
//! and are collected back in (stock, run) order, so results do not depend on
//! the number of threads.

pub mod config;
pub mod report;
pub mod synth;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{dataset_from_quotes, Dataset};
use crate::error::{Error, Result};
use crate::market_data::{load_metadata, load_quotes, QuoteSeries, StockMeta};
use crate::metrics::{AggregateMetrics, RunMetrics};
use crate::rprop::train;

pub use config::{ExperimentConfig, TradingConfig};
pub use report::{read_runs, write_group_tables, write_reports};
pub use synth::{generate, SynthKind, SynthParams};

#[derive(Debug, Clone, PartialEq)]
pub struct StockReport {
    pub ticker: String,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunMetrics>,
    pub aggregate: AggregateMetrics,
}

impl StockReport {
    pub fn from_runs(ticker: impl Into<String>, seeds: Vec<u64>, runs: Vec<RunMetrics>) -> Result<Self> {
        let aggregate = AggregateMetrics::from_runs(&runs)?;
        Ok(Self { ticker: ticker.into(), seeds, runs, aggregate })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockResult {
    pub meta: StockMeta,
    pub report: StockReport,
}

/// Reports for a stock universe, ordered by percentile group, then market
/// cap, then ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseReport {
    pub stocks: Vec<StockResult>,
}

impl UniverseReport {
    pub fn new(mut stocks: Vec<StockResult>) -> Self {
        stocks.sort_by(|a, b| {
            a.meta
                .percentile_group
                .cmp(&b.meta.percentile_group)
                .then(a.meta.market_cap.total_cmp(&b.meta.market_cap))
                .then_with(|| a.meta.ticker.cmp(&b.meta.ticker))
        });
        Self { stocks }
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// One independent training run on a prepared dataset.
pub fn run_once(data: &Dataset, cfg: &ExperimentConfig, grid: &[f64], run: usize) -> Result<RunMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed(run));
    let params = train(data.train(), &cfg.rprop, &mut rng)?;
    RunMetrics::evaluate(&params, data, grid, cfg.trading.initial_position)
}

fn checked_inputs(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    if cfg.runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    cfg.rprop.validate()?;
    cfg.trading.grid()
}

fn run_jobs(datasets: &[Dataset], cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<StockReport>> {
    let jobs: Vec<(usize, usize)> =
        (0..datasets.len()).flat_map(|s| (0..cfg.runs).map(move |r| (s, r))).collect();
    let results: Vec<Result<RunMetrics>> = pool(cfg.threads)?.install(|| {
        jobs.par_iter()
            .map(|&(s, r)| {
                run_once(&datasets[s], cfg, grid, r).map_err(|e| Error::Run {
                    ticker: datasets[s].ticker.clone(),
                    run: r,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let mut results = results.into_iter();
    datasets
        .iter()
        .map(|d| {
            let runs = results.by_ref().take(cfg.runs).collect::<Result<Vec<_>>>()?;
            let seeds = (0..cfg.runs).map(|r| cfg.seed(r)).collect();
            StockReport::from_runs(d.ticker.clone(), seeds, runs)
        })
        .collect()
}

/// All runs for one stock.
pub fn run_stock(quotes: &QuoteSeries, cfg: &ExperimentConfig) -> Result<StockReport> {
    let grid = checked_inputs(cfg)?;
    let data = dataset_from_quotes(quotes)?;
    if data.train().is_empty() {
        return Err(Error::Size(format!("{}: training half is empty", data.ticker)));
    }
    Ok(run_jobs(std::slice::from_ref(&data), cfg, &grid)?.remove(0))
}

/// Runs every stock in `meta`, reading `<quotes_dir>/<ticker>.csv`. All
/// quote files are checked before any training starts.
pub fn run_universe_with(meta: Vec<StockMeta>, cfg: &ExperimentConfig) -> Result<UniverseReport> {
    let grid = checked_inputs(cfg)?;
    if meta.is_empty() {
        return Err(Error::Config("metadata lists no stocks".into()));
    }
    if let Some(m) = meta.iter().find(|m| !cfg.quote_path(&m.ticker).is_file()) {
        return Err(Error::Config(format!(
            "no quote file for {} (expected {})",
            m.ticker,
            cfg.quote_path(&m.ticker).display()
        )));
    }
    let mut datasets = Vec::with_capacity(meta.len());
    for m in &meta {
        let mut quotes = load_quotes(cfg.quote_path(&m.ticker))?;
        if quotes.ticker() != m.ticker {
            quotes = QuoteSeries::new(m.ticker.clone(), quotes.timestamps().to_vec(), quotes.prices().to_vec())?;
        }
        let data = dataset_from_quotes(&quotes)?;
        if data.train().is_empty() {
            return Err(Error::Size(format!("{}: training half is empty", m.ticker)));
        }
        datasets.push(data);
    }
    let reports = run_jobs(&datasets, cfg, &grid)?;
    Ok(UniverseReport::new(
        meta.into_iter().zip(reports).map(|(meta, report)| StockResult { meta, report }).collect(),
    ))
}

/// [`run_universe_with`] on the configured metadata file.
pub fn run_universe(cfg: &ExperimentConfig) -> Result<UniverseReport> {
    cfg.validate()?;
    run_universe_with(load_metadata(&cfg.metadata)?, cfg)
}

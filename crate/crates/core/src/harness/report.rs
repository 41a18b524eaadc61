//! Report files.
//!
//! - `group_<k>.csv`: one table per capitalization group, metrics as rows
//!   and tickers as columns, means with their standard deviation below.
//! - `runs.csv`: every run of every stock at full precision.
//! - `scatter.csv`: log market cap against mean sign prediction per stock,
//!   plus the mean point of each group.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{StockReport, StockResult, UniverseReport};
use crate::error::{Error, Result};
use crate::market_data::{PercentileGroup, StockMeta};
use crate::metrics::{mean, AggregateMetrics, RunMetrics};

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("writing csv", io),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

fn fixed(v: f64) -> String {
    format!("{v:.5}")
}

fn percent(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

type Row = (&'static str, fn(&AggregateMetrics) -> String);

const TABLE_ROWS: [Row; 16] = [
    ("Buy & Hold (train)", |a| fixed(a.bh_train.mean)),
    ("Return rule (train)", |a| fixed(a.return_rule_train.mean)),
    ("Std. Dev", |a| fixed(a.return_rule_train.std)),
    ("Buy & Hold (test)", |a| fixed(a.bh_test.mean)),
    ("Sign Prediction", |a| percent(a.sign_prediction.mean)),
    ("Std. Dev", |a| fixed(a.sign_prediction.std)),
    ("Total Return", |a| fixed(a.total_return_rule.mean)),
    ("Std. Dev", |a| fixed(a.total_return_rule.std)),
    ("Ideal Profit Ratio", |a| fixed(a.ideal_profit_ratio.mean)),
    ("Std. Dev", |a| fixed(a.ideal_profit_ratio.std)),
    ("Sharpe Ratio", |a| a.sharpe_ratio.map(fixed).unwrap_or_else(|| "n/a".into())),
    ("Range", |a| format!("+/-{}", fixed(a.threshold.mean))),
    ("Std. Dev", |a| fixed(a.threshold.std)),
    ("Total Return (raw sign)", |a| fixed(a.total_return_rawsign.mean)),
    ("Std. Dev", |a| fixed(a.total_return_rawsign.std)),
    ("Runs", |a| a.runs.to_string()),
];

/// One group table: a `Ticker` header row, then one row per metric.
pub fn group_table(stocks: &[&StockResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["Ticker".to_string()];
    header.extend(stocks.iter().map(|s| s.meta.ticker.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (label, cell) in TABLE_ROWS {
        let mut row = vec![label.to_string()];
        row.extend(stocks.iter().map(|s| cell(&s.report.aggregate)));
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::io("flushing csv", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Serialize, Deserialize)]
struct RunRow {
    ticker: String,
    sector: String,
    market_cap_kusd: f64,
    percentile: String,
    run: usize,
    seed: u64,
    bh_train: f64,
    bh_test: f64,
    return_rule_train: f64,
    sign_prediction: f64,
    total_return_rule: f64,
    total_return_rawsign: f64,
    max_return: f64,
    ideal_profit_ratio: f64,
    threshold: f64,
}

/// Run-level table sorted by (ticker, run).
pub fn runs_table(universe: &UniverseReport) -> Result<String> {
    let mut stocks: Vec<&StockResult> = universe.stocks.iter().collect();
    stocks.sort_by(|a, b| a.meta.ticker.cmp(&b.meta.ticker));
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in stocks {
        for (i, (r, seed)) in s.report.runs.iter().zip(&s.report.seeds).enumerate() {
            w.serialize(RunRow {
                ticker: s.meta.ticker.clone(),
                sector: s.meta.sector.clone(),
                market_cap_kusd: s.meta.market_cap,
                percentile: s.meta.percentile_group.label().to_string(),
                run: i,
                seed: *seed,
                bh_train: r.bh_train,
                bh_test: r.bh_test,
                return_rule_train: r.return_rule_train,
                sign_prediction: r.sign_prediction,
                total_return_rule: r.total_return_rule,
                total_return_rawsign: r.total_return_rawsign,
                max_return: r.max_return,
                ideal_profit_ratio: r.ideal_profit_ratio,
                threshold: r.threshold,
            })
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// Rebuilds a universe report from a `runs.csv`.
pub fn read_runs(path: impl AsRef<Path>) -> Result<UniverseReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_runs(&text, path)
}

pub fn parse_runs(text: &str, origin: &Path) -> Result<UniverseReport> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut by_ticker: BTreeMap<String, (StockMeta, Vec<(usize, u64, RunMetrics)>)> = BTreeMap::new();
    for row in rdr.deserialize::<RunRow>() {
        let row = row.map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let meta = StockMeta {
            ticker: row.ticker.clone(),
            sector: row.sector.clone(),
            market_cap: row.market_cap_kusd,
            percentile_group: row.percentile.parse::<PercentileGroup>()?,
        };
        let entry = by_ticker.entry(row.ticker.clone()).or_insert_with(|| (meta.clone(), Vec::new()));
        if entry.0 != meta {
            return Err(Error::Validation(format!(
                "{}: inconsistent metadata for {}",
                origin.display(),
                row.ticker
            )));
        }
        entry.1.push((
            row.run,
            row.seed,
            RunMetrics {
                bh_train: row.bh_train,
                bh_test: row.bh_test,
                return_rule_train: row.return_rule_train,
                sign_prediction: row.sign_prediction,
                total_return_rule: row.total_return_rule,
                total_return_rawsign: row.total_return_rawsign,
                max_return: row.max_return,
                ideal_profit_ratio: row.ideal_profit_ratio,
                threshold: row.threshold,
            },
        ));
    }
    if by_ticker.is_empty() {
        return Err(Error::Size(format!("{}: no runs", origin.display())));
    }
    let mut stocks = Vec::with_capacity(by_ticker.len());
    for (ticker, (meta, mut rows)) in by_ticker {
        rows.sort_by_key(|(run, _, _)| *run);
        if rows.iter().enumerate().any(|(i, (run, _, _))| *run != i) {
            return Err(Error::Validation(format!("{}: runs of {ticker} are not 0..n", origin.display())));
        }
        let seeds = rows.iter().map(|(_, s, _)| *s).collect();
        let runs = rows.into_iter().map(|(_, _, m)| m).collect();
        stocks.push(StockResult { meta, report: StockReport::from_runs(ticker, seeds, runs)? });
    }
    Ok(UniverseReport::new(stocks))
}

/// Per-stock points, then one mean point per group.
pub fn scatter_table(universe: &UniverseReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "ticker", "group", "ln_market_cap", "sign_prediction"]).map_err(csv_err)?;
    let mut groups: BTreeMap<PercentileGroup, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for s in &universe.stocks {
        let x = s.meta.market_cap.ln();
        let y = s.report.aggregate.sign_prediction.mean;
        w.write_record([
            "stock",
            &s.meta.ticker,
            s.meta.percentile_group.label(),
            &x.to_string(),
            &y.to_string(),
        ])
        .map_err(csv_err)?;
        let g = groups.entry(s.meta.percentile_group).or_default();
        g.0.push(x);
        g.1.push(y);
    }
    for (group, (xs, ys)) in &groups {
        w.write_record(["group_mean", "", group.label(), &mean(xs).to_string(), &mean(ys).to_string()])
            .map_err(csv_err)?;
    }
    finish(w)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

/// Writes `group_<k>.csv` for every group present and `scatter.csv`.
pub fn write_group_tables(universe: &UniverseReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if universe.stocks.is_empty() {
        return Err(Error::Size("no stock reports to write".into()));
    }
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for group in PercentileGroup::ALL {
        let members: Vec<&StockResult> =
            universe.stocks.iter().filter(|s| s.meta.percentile_group == group).collect();
        if members.is_empty() {
            continue;
        }
        written.push(write_file(dir, &format!("group_{}.csv", group.index()), &group_table(&members)?)?);
    }
    written.push(write_file(dir, "scatter.csv", &scatter_table(universe)?)?);
    Ok(written)
}

/// Group tables, `scatter.csv` and `runs.csv`.
pub fn write_reports(universe: &UniverseReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = write_group_tables(universe, dir)?;
    written.push(write_file(dir, "runs.csv", &runs_table(universe)?)?);
    Ok(written)
}

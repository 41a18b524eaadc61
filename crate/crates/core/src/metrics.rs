//! Profitability measures for one trained model and their aggregation over
//! independent runs.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::network::{predict, NetParams};
use crate::trading::{optimize_threshold, positions, rule_return, Position};

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn nonempty(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        Err(Error::Size(format!("{what}: no targets")))
    } else {
        Ok(())
    }
}

fn same_len(preds: &[f64], targets: &[f64]) -> Result<()> {
    if preds.len() != targets.len() {
        Err(Error::Shape { expected: targets.len(), got: preds.len() })
    } else {
        Ok(())
    }
}

/// Buy & hold return: the plain sum of log returns.
pub fn buy_and_hold(targets: &[f64]) -> Result<f64> {
    nonempty(targets, "buy & hold")?;
    Ok(targets.iter().sum())
}

/// Fraction of periods whose predicted sign equals the realized sign.
/// A zero only matches a zero.
pub fn sign_prediction_ratio(preds: &[f64], targets: &[f64]) -> Result<f64> {
    same_len(preds, targets)?;
    nonempty(targets, "sign prediction")?;
    let hits = preds.iter().zip(targets).filter(|(p, y)| sign(**p) == sign(**y)).count();
    Ok(hits as f64 / targets.len() as f64)
}

/// Return of a perfect forecaster, `Σ |y|`.
pub fn max_return(targets: &[f64]) -> Result<f64> {
    nonempty(targets, "max return")?;
    Ok(targets.iter().map(|y| y.abs()).sum())
}

/// `Σ sign(pred) · y`: always in the market on the predicted side, flat on a
/// zero prediction.
pub fn total_return_rawsign(preds: &[f64], targets: &[f64]) -> Result<f64> {
    same_len(preds, targets)?;
    Ok(preds.iter().zip(targets).map(|(p, y)| sign(*p) * y).sum())
}

/// `total / max`, defined as 0 when nothing could be earned.
pub fn ideal_profit_ratio(total: f64, max: f64) -> f64 {
    if max > 0.0 {
        total / max
    } else {
        0.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Mean over sample standard deviation of per-run total returns. `None`
/// when the runs show no dispersion.
pub fn sharpe_ratio(total_returns: &[f64]) -> Result<Option<f64>> {
    if total_returns.len() < 2 {
        return Err(Error::Size(format!(
            "sharpe ratio needs at least 2 runs, got {}",
            total_returns.len()
        )));
    }
    let sd = sample_std(total_returns);
    Ok(if sd > 0.0 { Some(mean(total_returns) / sd) } else { None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub bh_train: f64,
    pub bh_test: f64,
    pub return_rule_train: f64,
    pub sign_prediction: f64,
    pub total_return_rule: f64,
    pub total_return_rawsign: f64,
    pub max_return: f64,
    pub ideal_profit_ratio: f64,
    pub threshold: f64,
}

impl RunMetrics {
    /// Optimizes the band on the training half, then scores the test half.
    /// Both halves start from `initial`.
    pub fn evaluate(params: &NetParams, data: &Dataset, grid: &[f64], initial: Position) -> Result<Self> {
        let (train, test) = (data.train(), data.test());
        let train_y: Vec<f64> = train.iter().map(|s| s.y).collect();
        let test_y: Vec<f64> = test.iter().map(|s| s.y).collect();
        let train_pred = predict(params, train);
        let test_pred = predict(params, test);

        let (rule, return_rule_train) = optimize_threshold(&train_pred, &train_y, grid, initial)?;
        let total_return_rule = rule_return(&positions(&test_pred, rule, initial), &test_y)?;
        let max_return = max_return(&test_y)?;
        Ok(Self {
            bh_train: buy_and_hold(&train_y)?,
            bh_test: buy_and_hold(&test_y)?,
            return_rule_train,
            sign_prediction: sign_prediction_ratio(&test_pred, &test_y)?,
            total_return_rule,
            total_return_rawsign: total_return_rawsign(&test_pred, &test_y)?,
            max_return,
            ideal_profit_ratio: ideal_profit_ratio(total_return_rule, max_return),
            threshold: rule.half_width(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Self { mean: mean(values), std: sample_std(values) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub runs: usize,
    pub bh_train: Summary,
    pub bh_test: Summary,
    pub return_rule_train: Summary,
    pub sign_prediction: Summary,
    pub total_return_rule: Summary,
    pub total_return_rawsign: Summary,
    pub max_return: Summary,
    pub ideal_profit_ratio: Summary,
    /// `None` with a single run or when all runs earn the same.
    pub sharpe_ratio: Option<f64>,
    pub threshold: Summary,
}

impl AggregateMetrics {
    pub fn from_runs(runs: &[RunMetrics]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Size("no runs to aggregate".into()));
        }
        let col = |f: fn(&RunMetrics) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
        let total = col(|r| r.total_return_rule);
        let sharpe_ratio = if runs.len() >= 2 { sharpe_ratio(&total)? } else { None };
        Ok(Self {
            runs: runs.len(),
            bh_train: Summary::of(&col(|r| r.bh_train)),
            bh_test: Summary::of(&col(|r| r.bh_test)),
            return_rule_train: Summary::of(&col(|r| r.return_rule_train)),
            sign_prediction: Summary::of(&col(|r| r.sign_prediction)),
            total_return_rule: Summary::of(&total),
            total_return_rawsign: Summary::of(&col(|r| r.total_return_rawsign)),
            max_return: Summary::of(&col(|r| r.max_return)),
            ideal_profit_ratio: Summary::of(&col(|r| r.ideal_profit_ratio)),
            sharpe_ratio,
            threshold: Summary::of(&col(|r| r.threshold)),
        })
    }

    pub fn single_run(&self) -> bool {
        self.runs == 1
    }
}

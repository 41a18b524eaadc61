//! Threshold-band trading rule.
//!
//! A prediction above `X` goes long, below `-X` goes short, and anything
//! inside the band keeps the previous position. The band half-width is
//! picked from a grid by maximizing the rule's return on the training half.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::network::{predict, NetParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Long,
    Short,
}

impl Position {
    pub fn value(self) -> f64 {
        match self {
            Position::Long => 1.0,
            Position::Short => -1.0,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Long => "long",
            Position::Short => "short",
        })
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long" | "+1" | "1" => Ok(Position::Long),
            "short" | "-1" => Ok(Position::Short),
            _ => Err(Error::Config(format!("initial position must be long or short, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule {
    half_width: f64,
}

impl ThresholdRule {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::Config(format!("band half-width must be >= 0, got {half_width}")));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
}

pub fn positions(preds: &[f64], rule: ThresholdRule, initial: Position) -> Vec<Position> {
    let x = rule.half_width;
    let mut current = initial;
    preds
        .iter()
        .map(|&p| {
            if p > x {
                current = Position::Long;
            } else if p < -x {
                current = Position::Short;
            }
            current
        })
        .collect()
}

/// `Σ pos_j · y_j`.
pub fn rule_return(pos: &[Position], targets: &[f64]) -> Result<f64> {
    if pos.len() != targets.len() {
        return Err(Error::Shape { expected: pos.len(), got: targets.len() });
    }
    Ok(pos.iter().zip(targets).map(|(p, y)| p.value() * y).sum())
}

/// `{0, step, 2·step, …}` up to `max` inclusive.
pub fn threshold_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(max.is_finite() && max >= 0.0) {
        return Err(Error::Config(format!("trading.grid_max must be >= 0, got {max}")));
    }
    if max == 0.0 {
        return Ok(vec![0.0]);
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Config(format!("trading.grid_step must be > 0, got {step}")));
    }
    // absorb representation error in max / step (0.02 / 0.0005 = 40.000000000000004)
    let n = ((max / step) + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| step * k as f64).collect())
}

/// Grid point maximizing the rule return of `preds` against `targets`,
/// together with that return. Ties go to the smallest half-width.
pub fn optimize_threshold(
    preds: &[f64],
    targets: &[f64],
    grid: &[f64],
    initial: Position,
) -> Result<(ThresholdRule, f64)> {
    if grid.is_empty() {
        return Err(Error::Config("threshold grid is empty".into()));
    }
    if preds.is_empty() {
        return Err(Error::Size("no training predictions to optimize the band on".into()));
    }
    let mut best: Option<(ThresholdRule, f64)> = None;
    for &x in grid {
        let rule = ThresholdRule::new(x)?;
        let score = rule_return(&positions(preds, rule, initial), targets)?;
        best = match best {
            Some((b, s)) if s > score || (s == score && b.half_width <= x) => Some((b, s)),
            _ => Some((rule, score)),
        };
    }
    Ok(best.expect("grid is nonempty"))
}

/// Picks the band for a trained network on its training samples.
pub fn optimize_range(
    trained: &NetParams,
    train: &[Sample],
    grid: &[f64],
    initial: Position,
) -> Result<ThresholdRule> {
    let preds = predict(trained, train);
    let targets: Vec<f64> = train.iter().map(|s| s.y).collect();
    optimize_threshold(&preds, &targets, grid, initial).map(|(rule, _)| rule)
}

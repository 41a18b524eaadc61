//! Synthetic quote series for experiments without market data.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::market_data::{parse_timestamp, QuoteSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// `p_t = level + amplitude · sin(2πt / period)`
    Sine,
    /// Log returns `r_t = φ r_{t-1} + σ ε_t`
    Ar1,
    /// i.i.d. `N(0, σ²)` log returns
    Gaussian,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Self::Sine),
            "ar1" => Ok(Self::Ar1),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(Error::Config(format!("unknown series kind {s:?} (sine, ar1, gaussian)"))),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sine => "sine",
            Self::Ar1 => "ar1",
            Self::Gaussian => "gaussian",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    /// Starting price, and the mean level of the sine.
    pub level: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phi: f64,
    pub sigma: f64,
    pub start: DateTime<Utc>,
    pub interval: Duration,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 0,
            level: 100.0,
            amplitude: 5.0,
            period: 50.0,
            phi: 0.3,
            sigma: 0.001,
            start: parse_timestamp("2015-09-16T14:00:00Z").unwrap(),
            interval: Duration::minutes(1),
        }
    }
}

pub fn generate(kind: SynthKind, length: usize, ticker: &str, p: &SynthParams) -> Result<QuoteSeries> {
    if length == 0 {
        return Err(Error::Config("series length must be >= 1".into()));
    }
    let prices: Vec<f64> = match kind {
        SynthKind::Sine => {
            if !(p.amplitude.abs() < p.level) {
                return Err(Error::Config("sine amplitude must be below the level".into()));
            }
            (0..length)
                .map(|t| p.level + p.amplitude * (std::f64::consts::TAU * t as f64 / p.period).sin())
                .collect()
        }
        SynthKind::Ar1 | SynthKind::Gaussian => {
            let phi = if kind == SynthKind::Ar1 { p.phi } else { 0.0 };
            if !(phi.abs() < 1.0) {
                return Err(Error::Config(format!("ar1 coefficient must satisfy |phi| < 1, got {phi}")));
            }
            let noise = Normal::new(0.0, p.sigma).map_err(|e| Error::Config(format!("sigma: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            // start from the stationary distribution
            let mut r = noise.sample(&mut rng) / (1.0 - phi * phi).sqrt();
            let mut log_p = p.level.ln();
            let mut out = Vec::with_capacity(length);
            out.push(p.level);
            for _ in 1..length {
                log_p += r;
                out.push(log_p.exp());
                r = phi * r + noise.sample(&mut rng);
            }
            out
        }
    };
    let timestamps = (0..length).map(|i| p.start + p.interval * i as i32).collect();
    QuoteSeries::new(ticker, timestamps, prices)
}

//! Supervised samples from a quote series.
//!
//! Each sample holds nine consecutive log returns, their least-squares
//! slope against the indices 1..9 as a tenth feature, and the return that
//! immediately follows the window as the target. Samples keep time order; the
//! first `floor(M / 2)` are the training half.

use crate::error::{Error, Result};
use crate::market_data::QuoteSeries;

/// Number of lagged returns in a window.
pub const WINDOW: usize = 9;
/// Features per sample: the window plus its trend.
pub const N_FEATURES: usize = WINDOW + 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub ticker: String,
    /// Entry `t - 1` is `ln(p_t / p_{t-1})`.
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: [f64; N_FEATURES],
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ticker: String,
    pub samples: Vec<Sample>,
    pub train_len: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn train(&self) -> &[Sample] {
        &self.samples[..self.train_len]
    }

    pub fn test(&self) -> &[Sample] {
        &self.samples[self.train_len..]
    }
}

pub fn compute_returns(quotes: &QuoteSeries) -> ReturnSeries {
    let returns = quotes.prices().windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    ReturnSeries { ticker: quotes.ticker().to_string(), returns }
}

/// Least-squares slope of `window` regressed on the indices 1..9.
pub fn ols_trend(window: &[f64; WINDOW]) -> f64 {
    // With centered indices d = k - 5 the slope is Σ d·r / Σ d², and pairing
    // ±d makes a flat window give exactly zero.
    const DENOM: f64 = 60.0;
    (1..=4)
        .map(|d| d as f64 * (window[4 + d] - window[4 - d]))
        .sum::<f64>()
        / DENOM
}

/// Number of samples obtainable from `n_returns` returns.
pub fn sample_count(n_returns: usize) -> usize {
    (n_returns + 1).saturating_sub(N_FEATURES)
}

/// Slides a nine-return window over `r`; the target is the next return.
///
/// Needs at least ten returns (eleven quotes).
pub fn build_dataset(r: &ReturnSeries) -> Result<Dataset> {
    let n = r.returns.len();
    if n < WINDOW + 1 {
        return Err(Error::Size(format!(
            "{}: {} returns, need at least {}",
            r.ticker,
            n,
            WINDOW + 1
        )));
    }
    if let Some(i) = r.returns.iter().position(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("{}: return #{} is not finite", r.ticker, i + 1)));
    }
    let samples: Vec<Sample> = r
        .returns
        .windows(WINDOW + 1)
        .map(|w| {
            let mut lags = [0.0; WINDOW];
            lags.copy_from_slice(&w[..WINDOW]);
            let mut x = [0.0; N_FEATURES];
            x[..WINDOW].copy_from_slice(&lags);
            x[WINDOW] = ols_trend(&lags);
            Sample { x, y: w[WINDOW] }
        })
        .collect();
    debug_assert_eq!(samples.len(), sample_count(n));
    let train_len = samples.len() / 2;
    Ok(Dataset { ticker: r.ticker.clone(), samples, train_len })
}

/// Convenience for `build_dataset(&compute_returns(q))`.
pub fn dataset_from_quotes(q: &QuoteSeries) -> Result<Dataset> {
    build_dataset(&compute_returns(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::parse_timestamp;
    use proptest::prelude::*;

    fn series(prices: &[f64]) -> QuoteSeries {
        let t0 = parse_timestamp("2015-09-16T14:00:00Z").unwrap();
        let ts = (0..prices.len()).map(|i| t0 + chrono::Duration::minutes(i as i64)).collect();
        QuoteSeries::new("T", ts, prices.to_vec()).unwrap()
    }

    fn from_returns(returns: &[f64]) -> ReturnSeries {
        ReturnSeries { ticker: "T".into(), returns: returns.to_vec() }
    }

    #[test]
    fn returns_basic() {
        assert_eq!(compute_returns(&series(&[100.0, 100.0])).returns, vec![0.0]);
        // ln(1.05) = 0.048790164169432003065374404223...
        let r = compute_returns(&series(&[100.0, 105.0])).returns;
        assert!((r[0] - 0.048_790_164_169_432).abs() < 1e-15);
        let r = compute_returns(&series(&[100.0, 105.0, 100.0])).returns;
        assert!(r.iter().sum::<f64>().abs() < 1e-15);
    }

    // Normal equations for y = a + b k, solved by Cramer's rule.
    fn slope_oracle(w: &[f64; 9]) -> f64 {
        let (mut sk, mut skk, mut sy, mut sky) = (0.0, 0.0, 0.0, 0.0);
        for (i, y) in w.iter().enumerate() {
            let k = (i + 1) as f64;
            sk += k;
            skk += k * k;
            sy += y;
            sky += k * y;
        }
        let n = 9.0;
        (n * sky - sk * sy) / (n * skk - sk * sk)
    }

    #[test]
    fn trend_examples() {
        assert_eq!(ols_trend(&[0.003; 9]), 0.0);
        let c = 0.0021;
        let line: [f64; 9] = std::array::from_fn(|i| c * (i + 1) as f64);
        assert!((ols_trend(&line) - c).abs() < 1e-17);
        assert_eq!(ols_trend(&[-0.0123; 9]), 0.0);
    }

    #[test]
    fn too_short() {
        assert!(matches!(build_dataset(&from_returns(&[0.0; 9])), Err(Error::Size(_))));
    }

    #[test]
    fn eleven_quotes_is_smallest_dataset() {
        let prices: Vec<f64> = (0..11).map(|i| 100.0 + i as f64).collect();
        let d = dataset_from_quotes(&series(&prices)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.train_len, 0);
        assert_eq!(d.test().len(), 1);
    }

    #[test]
    fn thousand_quotes_split() {
        let prices: Vec<f64> = (0..1000).map(|i| 100.0 + (i as f64 * 0.1).sin()).collect();
        let d = dataset_from_quotes(&series(&prices)).unwrap();
        assert_eq!(d.len(), 990);
        assert_eq!(d.train().len(), 495);
        assert_eq!(d.test().len(), 495);
    }

    #[test]
    fn window_indices() {
        let returns: Vec<f64> = (1..=11).map(|i| 0.01 * i as f64).collect();
        let d = build_dataset(&from_returns(&returns)).unwrap();
        // Index oracle: sample j uses returns j..j+9 and targets j+9 (0-based).
        for (j, s) in d.samples.iter().enumerate() {
            for k in 0..9 {
                assert_eq!(s.x[k], returns[j + k]);
            }
            assert_eq!(s.y, returns[j + 9]);
        }
        let first = &d.samples[0];
        assert_eq!(&first.x[..9], &returns[..9]);
        assert!((first.x[9] - 0.01).abs() < 1e-15);
        assert_eq!(first.y, 0.10);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn non_finite_returns_rejected() {
        let mut r = vec![0.001; 12];
        r[4] = f64::NAN;
        assert!(matches!(build_dataset(&from_returns(&r)), Err(Error::Validation(_))));
    }

    proptest! {
        #[test]
        fn trend_matches_normal_equations(w in prop::array::uniform9(-0.05f64..0.05)) {
            prop_assert!((ols_trend(&w) - slope_oracle(&w)).abs() < 1e-12);
        }

        #[test]
        fn trend_translation_invariant(w in prop::array::uniform9(-0.05f64..0.05), c in -1.0f64..1.0) {
            let shifted = w.map(|v| v + c);
            prop_assert!((ols_trend(&shifted) - ols_trend(&w)).abs() < 1e-12);
        }

        #[test]
        fn sliding_window_structure(returns in prop::collection::vec(-0.02f64..0.02, 10..80)) {
            let d = build_dataset(&from_returns(&returns)).unwrap();
            prop_assert_eq!(d.len(), returns.len() - 9);
            prop_assert_eq!(d.train_len, d.len() / 2);
            for pair in d.samples.windows(2) {
                for k in 1..9 {
                    prop_assert_eq!(pair[1].x[k - 1], pair[0].x[k]);
                }
                // target of one sample is the newest lag of the next
                prop_assert_eq!(pair[1].x[8], pair[0].y);
            }
            for (j, s) in d.samples.iter().enumerate() {
                // every lag precedes the target index j + 9
                prop_assert_eq!(s.y, returns[j + 9]);
                prop_assert!(s.x.iter().all(|v| v.is_finite()));
            }
        }
    }
}

//! Intraday stock-return sign forecasting.
//!
//! The pipeline turns a series of quotes into nine lagged log returns plus
//! their least-squares trend, fits a fixed 10-6-1 feedforward network with
//! resilient propagation, picks a symmetric no-trade band on the training
//! half and scores the held-out half with buy & hold, sign prediction,
//! maximum return, total return, ideal profit ratio and a cross-run Sharpe
//! ratio.
//!
//! ```text
//! quotes ──► returns ──► samples (x1..x9, trend; y) ──► train / test halves
//!                                         │
//!          init U(-1,1) ──► RPROP (full batch) ──► trained 10-6-1 net
//!                                         │
//!            band search on train ──► positions ──► metrics on test
//! ```
//!
//! - [`market_data`]: quote and metadata CSV ingestion
//! - [`dataset`]: returns, OLS trend feature, sample windows and split
//! - [`network`]: parameters, forward pass, MSE loss and its gradient
//! - [`rprop`]: the optimizer and the training loop
//! - [`trading`]: threshold band positions and band optimization
//! - [`metrics`]: per-run profitability measures and aggregation
//! - [`harness`]: configuration, orchestration, synthetic data and reports

pub mod dataset;
pub mod error;
pub mod harness;
pub mod market_data;
pub mod metrics;
pub mod network;
pub mod rprop;
pub mod trading;

pub use dataset::{build_dataset, compute_returns, ols_trend, Dataset, ReturnSeries, Sample};
pub use error::{Error, Result};
pub use market_data::{load_metadata, load_quotes, write_quotes, PercentileGroup, QuoteSeries, StockMeta};
pub use metrics::{AggregateMetrics, RunMetrics, Summary};
pub use network::{forward, gradient, hidden_act, init_params, loss, output_act, Gradient, NetParams};
pub use rprop::{train, RpropConfig, RpropState};
pub use trading::{optimize_range, positions, rule_return, Position, ThresholdRule};

//! Resilient propagation with weight backtracking.
//!
//! Every weight carries its own step size. When the partial derivative keeps
//! its sign the step grows by `increase_factor`; when it flips, the step
//! shrinks by `decrease_factor`, the previous change to that weight is undone
//! and the stored derivative is cleared so the next iteration moves on fresh
//! evidence only. Gradient magnitudes never enter the update.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::network::{gradient, init_params, NetParams, N_WEIGHTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RpropConfig {
    pub initial_update: f64,
    pub min_update: f64,
    pub max_update: f64,
    pub increase_factor: f64,
    pub decrease_factor: f64,
    pub max_iterations: usize,
}

impl Default for RpropConfig {
    fn default() -> Self {
        Self {
            initial_update: 0.01,
            min_update: 1e-6,
            max_update: 50.0,
            increase_factor: 1.2,
            decrease_factor: 0.5,
            max_iterations: 3000,
        }
    }
}

impl RpropConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.min_update > 0.0
            && self.min_update <= self.initial_update
            && self.initial_update <= self.max_update
            && self.max_update.is_finite();
        if !ok {
            return Err(Error::Config(format!(
                "rprop updates must satisfy 0 < min_update <= initial_update <= max_update < inf, got {} / {} / {}",
                self.min_update, self.initial_update, self.max_update
            )));
        }
        if !(0.0 < self.decrease_factor && self.decrease_factor < 1.0 && 1.0 < self.increase_factor) {
            return Err(Error::Config(format!(
                "rprop factors must satisfy 0 < decrease_factor < 1 < increase_factor, got {} / {}",
                self.decrease_factor, self.increase_factor
            )));
        }
        if !self.increase_factor.is_finite() {
            return Err(Error::Config("rprop.increase_factor must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpropState {
    pub step_sizes: Vec<f64>,
    pub prev_grad: Vec<f64>,
    pub prev_delta: Vec<f64>,
}

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

impl RpropState {
    pub fn new(n_weights: usize, cfg: &RpropConfig) -> Self {
        Self {
            step_sizes: vec![cfg.initial_update; n_weights],
            prev_grad: vec![0.0; n_weights],
            prev_delta: vec![0.0; n_weights],
        }
    }

    pub fn len(&self) -> usize {
        self.step_sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step_sizes.is_empty()
    }

    /// One update of `params` in place from the full-batch gradient `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &RpropConfig) -> Result<()> {
        let n = self.len();
        if self.prev_grad.len() != n || self.prev_delta.len() != n {
            return Err(Error::Shape { expected: n, got: self.prev_grad.len().min(self.prev_delta.len()) });
        }
        if params.len() != n {
            return Err(Error::Shape { expected: n, got: params.len() });
        }
        if grad.len() != n {
            return Err(Error::Shape { expected: n, got: grad.len() });
        }

        for i in 0..n {
            let g = grad[i];
            let trend = self.prev_grad[i] * g;
            if trend > 0.0 {
                self.step_sizes[i] = (self.step_sizes[i] * cfg.increase_factor).min(cfg.max_update);
                let delta = -sign(g) * self.step_sizes[i];
                params[i] += delta;
                self.prev_delta[i] = delta;
                self.prev_grad[i] = g;
            } else if trend < 0.0 {
                self.step_sizes[i] = (self.step_sizes[i] * cfg.decrease_factor).max(cfg.min_update);
                params[i] -= self.prev_delta[i];
                self.prev_delta[i] = 0.0;
                self.prev_grad[i] = 0.0;
            } else {
                let delta = -sign(g) * self.step_sizes[i];
                params[i] += delta;
                self.prev_delta[i] = delta;
                self.prev_grad[i] = g;
            }
        }
        Ok(())
    }
}

/// [`RpropState::step`] on network parameters.
pub fn rprop_step(
    params: &mut NetParams,
    state: &mut RpropState,
    grad: &crate::network::Gradient,
    cfg: &RpropConfig,
) -> Result<()> {
    state.step(params.as_mut_slice(), grad.as_slice(), cfg)
}

/// Runs exactly `cfg.max_iterations` full-batch iterations from `params`.
pub fn train_from(mut params: NetParams, samples: &[Sample], cfg: &RpropConfig) -> Result<NetParams> {
    if samples.is_empty() {
        return Err(Error::Size("training set is empty".into()));
    }
    cfg.validate()?;
    let mut state = RpropState::new(N_WEIGHTS, cfg);
    for _ in 0..cfg.max_iterations {
        let g = gradient(&params, samples)?;
        rprop_step(&mut params, &mut state, &g, cfg)?;
    }
    Ok(params)
}

/// Draws initial weights from `rng`, then trains on `samples`.
pub fn train<R: Rng + ?Sized>(samples: &[Sample], cfg: &RpropConfig, rng: &mut R) -> Result<NetParams> {
    if samples.is_empty() {
        return Err(Error::Size("training set is empty".into()));
    }
    train_from(init_params(rng), samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{loss, output_act, Gradient};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(step: f64, prev_grad: f64) -> RpropState {
        RpropState { step_sizes: vec![step], prev_grad: vec![prev_grad], prev_delta: vec![-0.01] }
    }

    #[test]
    fn same_sign_grows() {
        let cfg = RpropConfig::default();
        let mut s = single(0.01, 1.0);
        let mut w = [0.5];
        s.step(&mut w, &[1.0], &cfg).unwrap();
        assert!((s.step_sizes[0] - 0.012).abs() < 1e-17);
        assert!((w[0] - (0.5 - 0.012)).abs() < 1e-15);
    }

    #[test]
    fn flip_shrinks_and_backtracks() {
        let cfg = RpropConfig::default();
        let mut s = single(0.01, 1.0);
        let mut w = [0.49];
        s.step(&mut w, &[-1.0], &cfg).unwrap();
        assert_eq!(s.step_sizes[0], 0.005);
        // the previous change of -0.01 is undone
        assert!((w[0] - 0.5).abs() < 1e-15);
        assert_eq!(s.prev_grad[0], 0.0);

        // next iteration takes the neutral branch with the reduced step
        s.step(&mut w, &[-1.0], &cfg).unwrap();
        assert_eq!(s.step_sizes[0], 0.005);
        assert!((w[0] - 0.505).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_moves_nothing() {
        let cfg = RpropConfig::default();
        let mut p = init_params(&mut ChaCha8Rng::seed_from_u64(4));
        let before = p;
        let mut s = RpropState::new(N_WEIGHTS, &cfg);
        for _ in 0..10 {
            rprop_step(&mut p, &mut s, &Gradient([0.0; N_WEIGHTS]), &cfg).unwrap();
        }
        assert_eq!(p, before);
        assert!(s.step_sizes.iter().all(|v| *v == cfg.initial_update));
    }

    #[test]
    fn shape_mismatch() {
        let cfg = RpropConfig::default();
        let mut s = RpropState::new(3, &cfg);
        assert!(matches!(s.step(&mut [0.0; 2], &[0.0; 3], &cfg), Err(Error::Shape { .. })));
        assert!(matches!(s.step(&mut [0.0; 3], &[0.0; 4], &cfg), Err(Error::Shape { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(RpropConfig::default().validate().is_ok());
        let bad = RpropConfig { min_update: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = RpropConfig { decrease_factor: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = RpropConfig { increase_factor: 0.9, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    // Independent scalar simulation of the recurrence on f(w) = w^2.
    fn scalar_oracle(mut w: f64, iters: usize) -> f64 {
        let (mut step, mut prev_g, mut prev_d) = (0.01f64, 0.0f64, 0.0f64);
        for _ in 0..iters {
            let g = 2.0 * w;
            if prev_g * g > 0.0 {
                step = (step * 1.2).min(50.0);
                prev_d = -g.signum() * step;
                w += prev_d;
                prev_g = g;
            } else if prev_g * g < 0.0 {
                step = (step * 0.5).max(1e-6);
                w -= prev_d;
                prev_d = 0.0;
                prev_g = 0.0;
            } else {
                prev_d = if g == 0.0 { 0.0 } else { -g.signum() * step };
                w += prev_d;
                prev_g = g;
            }
        }
        w
    }

    #[test]
    fn quadratic_surrogate_converges() {
        let cfg = RpropConfig::default();
        let mut s = RpropState::new(1, &cfg);
        let mut w = [1.0];
        for _ in 0..200 {
            let g = [2.0 * w[0]];
            s.step(&mut w, &g, &cfg).unwrap();
        }
        assert!(w[0].abs() < 1e-4, "w = {}", w[0]);
        assert_eq!(w[0], scalar_oracle(1.0, 200));
    }

    #[test]
    fn training_is_deterministic_and_rejects_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let data: Vec<Sample> = (0..30)
            .map(|_| {
                let x: [f64; 10] = std::array::from_fn(|_| rng.random_range(-0.01..0.01));
                Sample { x, y: 0.5 * x[0] }
            })
            .collect();
        let cfg = RpropConfig { max_iterations: 50, ..Default::default() };
        let a = train(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = train(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert!(matches!(train(&[], &cfg, &mut ChaCha8Rng::seed_from_u64(1)), Err(Error::Size(_))));
    }

    #[test]
    fn training_reduces_loss_on_learnable_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = 0.8;
        let data: Vec<Sample> = (0..100)
            .map(|_| {
                let x: [f64; 10] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                Sample { x, y: output_act(a * x[0]) }
            })
            .collect();
        let cfg = RpropConfig { max_iterations: 300, ..Default::default() };
        let mut improved = 0;
        for seed in 0..30u64 {
            let initial = init_params(&mut ChaCha8Rng::seed_from_u64(seed));
            let trained = train(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            if loss(&trained, &data).unwrap() < loss(&initial, &data).unwrap() {
                improved += 1;
            }
        }
        assert!(improved >= 29, "{improved}/30");
    }

    proptest! {
        #[test]
        fn steps_stay_in_bounds(grads in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 1..200)) {
            let cfg = RpropConfig::default();
            let mut s = RpropState::new(4, &cfg);
            let mut w = [0.0; 4];
            for g in &grads {
                let before = w;
                s.step(&mut w, g, &cfg).unwrap();
                for i in 0..4 {
                    prop_assert!(s.step_sizes[i] >= cfg.min_update && s.step_sizes[i] <= cfg.max_update);
                    prop_assert!((w[i] - before[i]).abs() <= cfg.max_update);
                }
            }
        }
    }
}

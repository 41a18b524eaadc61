//! The 10-6-1 feedforward network.
//!
//! Hidden units use the logistic function, the output unit the bipolar
//! sigmoid (numerically `tanh`), so the prediction can carry either sign.
//! Weights live in one flat array in canonical order: for hidden unit `i`
//! the bias followed by its ten input weights at `i * 11 + k`, then the
//! output bias and six output weights at `66 + i`.

use std::ops::{Index, IndexMut};

use rand::Rng;

use crate::dataset::{Sample, N_FEATURES};
use crate::error::{Error, Result};

pub const N_HIDDEN: usize = 6;
/// Weights per hidden unit, bias first.
pub const HIDDEN_STRIDE: usize = N_FEATURES + 1;
pub const N_HIDDEN_WEIGHTS: usize = N_HIDDEN * HIDDEN_STRIDE;
pub const N_OUTPUT_WEIGHTS: usize = N_HIDDEN + 1;
pub const N_WEIGHTS: usize = N_HIDDEN_WEIGHTS + N_OUTPUT_WEIGHTS;

/// Logistic sigmoid, range (0, 1).
#[inline]
pub fn hidden_act(n: f64) -> f64 {
    1.0 / (1.0 + (-n).exp())
}

/// Bipolar sigmoid `2 / (1 + e^{-2n}) - 1`, range (-1, 1).
///
/// Evaluated as `tanh`, which is the same function without the cancellation
/// the literal form suffers near zero, where intraday predictions live.
#[inline]
pub fn output_act(n: f64) -> f64 {
    n.tanh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    w: [f64; N_WEIGHTS],
}

impl NetParams {
    pub fn zeros() -> Self {
        Self { w: [0.0; N_WEIGHTS] }
    }

    pub fn from_slice(w: &[f64]) -> Result<Self> {
        let w: [f64; N_WEIGHTS] = w
            .try_into()
            .map_err(|_| Error::Shape { expected: N_WEIGHTS, got: w.len() })?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("network weights must be finite".into()));
        }
        Ok(Self { w })
    }

    /// Index of `b_{k,i}`; `k = 0` is the bias of hidden unit `i` (0-based).
    #[inline]
    pub const fn hidden_index(i: usize, k: usize) -> usize {
        i * HIDDEN_STRIDE + k
    }

    /// Index of `a_i`; `i = 0` is the output bias.
    #[inline]
    pub const fn output_index(i: usize) -> usize {
        N_HIDDEN_WEIGHTS + i
    }

    pub fn hidden(&self, i: usize, k: usize) -> f64 {
        self.w[Self::hidden_index(i, k)]
    }

    pub fn output(&self, i: usize) -> f64 {
        self.w[Self::output_index(i)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.w
    }

    /// Parameter snapshot: one decimal per line in canonical order.
    pub fn to_snapshot(&self) -> String {
        self.w.iter().map(|v| format!("{v}\n")).collect()
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.parse::<f64>()
                    .map_err(|_| Error::Validation(format!("snapshot line {}: invalid number {l:?}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_slice(&values)
    }
}

impl Index<usize> for NetParams {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.w[i]
    }
}

impl IndexMut<usize> for NetParams {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.w[i]
    }
}

/// `∂loss/∂w` in the same layout as [`NetParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradient(pub [f64; N_WEIGHTS]);

impl Gradient {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// All 73 weights i.i.d. uniform on [-1, 1].
pub fn init_params<R: Rng + ?Sized>(rng: &mut R) -> NetParams {
    let mut w = [0.0; N_WEIGHTS];
    for v in w.iter_mut() {
        *v = rng.random_range(-1.0..=1.0);
    }
    NetParams { w }
}

struct Activations {
    hidden: [f64; N_HIDDEN],
    out: f64,
}

#[inline]
fn activations(p: &NetParams, x: &[f64; N_FEATURES]) -> Activations {
    let mut hidden = [0.0; N_HIDDEN];
    let mut z = p.output(0);
    for (i, h) in hidden.iter_mut().enumerate() {
        let row = &p.w[i * HIDDEN_STRIDE..(i + 1) * HIDDEN_STRIDE];
        let u = row[0] + row[1..].iter().zip(x).map(|(b, xk)| b * xk).sum::<f64>();
        *h = hidden_act(u);
        z += p.output(i + 1) * *h;
    }
    Activations { hidden, out: output_act(z) }
}

pub fn forward(p: &NetParams, x: &[f64; N_FEATURES]) -> f64 {
    activations(p, x).out
}

pub fn predict(p: &NetParams, samples: &[Sample]) -> Vec<f64> {
    samples.iter().map(|s| forward(p, &s.x)).collect()
}

/// Mean squared error over `samples`.
pub fn loss(p: &NetParams, samples: &[Sample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Size("loss over an empty sample set".into()));
    }
    let sse: f64 = samples
        .iter()
        .map(|s| {
            let e = forward(p, &s.x) - s.y;
            e * e
        })
        .sum();
    Ok(sse / samples.len() as f64)
}

/// Analytic gradient of [`loss`] by backpropagation.
pub fn gradient(p: &NetParams, samples: &[Sample]) -> Result<Gradient> {
    if samples.is_empty() {
        return Err(Error::Size("gradient over an empty sample set".into()));
    }
    let mut g = [0.0; N_WEIGHTS];
    let scale = 2.0 / samples.len() as f64;
    for s in samples {
        let act = activations(p, &s.x);
        // dL/dz at the output pre-activation
        let dz = scale * (act.out - s.y) * (1.0 - act.out * act.out);
        g[NetParams::output_index(0)] += dz;
        for (i, h) in act.hidden.iter().enumerate() {
            g[NetParams::output_index(i + 1)] += dz * h;
            let du = dz * p.output(i + 1) * h * (1.0 - h);
            let row = &mut g[i * HIDDEN_STRIDE..(i + 1) * HIDDEN_STRIDE];
            row[0] += du;
            for (gk, xk) in row[1..].iter_mut().zip(&s.x) {
                *gk += du * xk;
            }
        }
    }
    Ok(Gradient(g))
}

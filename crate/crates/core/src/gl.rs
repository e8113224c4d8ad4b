//! Grünwald–Letnikov unit-step simulation of fractional transfer functions.
//!
//! For `Y(s)/R(s) = Σ b_j s^{β_j} / Σ a_i s^{α_i}` the scheme solves
//!
//! ```text
//! Σ a_i D^{α_i} y(t_k) = Σ b_j D^{β_j} r(t_k),
//! D^α x(t_k) ≈ h^{-α} Σ_{m=0}^{min(k, L)} w_m^{(α)} x_{k-m}
//! ```
//!
//! from rest, with `r_k = 1` for `k ≥ 0` and no pre-history. Each `y_k` is
//! isolated from the `m = 0` terms. The GL difference of the sampled step at
//! `k = 0` is an impulse, so improper or nearly improper loops show a jump in
//! the first samples; that is a property of the scheme and is kept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{FractionalPolynomial, FractionalTransferFunction};

/// Upper bound on `horizon / time_step`.
pub const MAX_STEPS: f64 = 1e7;

/// How much history the GL sums keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemoryLength {
    #[default]
    #[serde(with = "full_marker")]
    Full,
    /// Short-memory truncation to the last `L` samples.
    Steps(usize),
}

mod full_marker {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("full")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "full" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!("expected \"full\" or an integer, got {s:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub time_step: f64,
    pub horizon: f64,
    #[serde(default)]
    pub memory_length: MemoryLength,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { time_step: 1e-3, horizon: 10.0, memory_length: MemoryLength::Full }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::InvalidConfig(format!("time_step must be positive, got {}", self.time_step)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.horizon / self.time_step > MAX_STEPS {
            return Err(Error::InvalidConfig(format!(
                "horizon/time_step = {} exceeds {MAX_STEPS}",
                self.horizon / self.time_step
            )));
        }
        Ok(())
    }

    /// Number of samples including `t = 0`; never fewer than 2.
    pub fn sample_count(&self) -> usize {
        ((self.horizon / self.time_step).round() as usize + 1).max(2)
    }
}

/// Grünwald–Letnikov binomial weights `w_j = (-1)^j C(α, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlWeights {
    pub alpha: f64,
    pub weights: Vec<f64>,
}

/// First `count` weights from `w_0 = 1`, `w_j = w_{j-1}(1 − (1+α)/j)`.
pub fn gl_weights(alpha: f64, count: usize) -> GlWeights {
    let mut weights = Vec::with_capacity(count);
    let mut w = 1.0;
    for j in 0..count {
        if j > 0 {
            w *= 1.0 - (1.0 + alpha) / j as f64;
        }
        weights.push(w);
    }
    GlWeights { alpha, weights }
}

/// Full-memory GL derivative of order `alpha` of a signal sampled at step
/// `h` from `t = 0`, with zero history before the first sample.
pub fn gl_derivative(x: &[f64], alpha: f64, h: f64) -> Vec<f64> {
    let w = gl_weights(alpha, x.len()).weights;
    let scale = h.powf(-alpha);
    (0..x.len())
        .map(|k| scale * (0..=k).map(|m| w[m] * x[k - m]).sum::<f64>())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub time_step: f64,
    pub samples: Vec<f64>,
    pub input_label: String,
}

impl StepResponse {
    pub fn new(time_step: f64, samples: Vec<f64>) -> Self {
        Self { time_step, samples, input_label: "unit step".to_string() }
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.time_step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.time(k))
    }

    /// `t,y` CSV with one row per sample. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 24 + 4);
        out.push_str("t,y\n");
        for (k, y) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:?},{:?}\n", self.time(k), y));
        }
        out
    }
}

/// Coefficient-weighted sum of GL weight vectors of a polynomial, each term
/// scaled by `h^{-α}`: the kernel `K_m` with `Σ a_i D^{α_i} x_k ≈ Σ_m K_m x_{k-m}`.
fn combined_kernel(p: &FractionalPolynomial, h: f64, len: usize) -> Vec<f64> {
    let mut kernel = vec![0.0; len];
    for term in p.terms() {
        let scale = term.coefficient * h.powf(-term.exponent);
        let w = gl_weights(term.exponent, len);
        for (k, wm) in kernel.iter_mut().zip(&w.weights) {
            *k += scale * wm;
        }
    }
    kernel
}

/// Unit-step response of `tf` from rest.
///
/// Fails with [`Error::Diverged`] at the first non-finite sample, carrying
/// the samples computed so far.
pub fn simulate_step(tf: &FractionalTransferFunction, cfg: &SimConfig) -> Result<StepResponse> {
    cfg.validate()?;
    let h = cfg.time_step;
    let n = cfg.sample_count();
    let window = match cfg.memory_length {
        MemoryLength::Full => n,
        MemoryLength::Steps(l) => (l + 1).min(n),
    };

    let output_kernel = combined_kernel(tf.denominator(), h, window);
    let lead = output_kernel[0];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::SingularUpdate);
    }

    // The input is 1 at every sample, so its GL sum is a running sum of the
    // input kernel, frozen once the memory window is full.
    let input_kernel = combined_kernel(tf.numerator(), h, window);
    let mut input_sum = 0.0;

    let mut y = Vec::with_capacity(n);
    for k in 0..n {
        if k < window {
            input_sum += input_kernel[k];
        }
        let reach = k.min(window - 1);
        let history: f64 = output_kernel[1..=reach]
            .iter()
            .zip(y[k - reach..k].iter().rev())
            .map(|(w, v)| w * v)
            .sum();
        let value = (input_sum - history) / lead;
        if !value.is_finite() {
            return Err(Error::Diverged {
                index: k,
                response: Box::new(StepResponse::new(h, y)),
            });
        }
        y.push(value);
    }
    Ok(StepResponse::new(h, y))
}

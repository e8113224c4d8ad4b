//! Time-domain metrics of a sampled step response.
//!
//! All levels are relative to the measured steady state (mean of the final
//! 5% of samples), not to the reference value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl::StepResponse;

const TAIL_FRACTION: f64 = 0.05;
const SETTLING_BAND: f64 = 0.02;
const STABILITY_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RiseTimeConvention {
    /// From the first 10% crossing to the first 90% crossing.
    #[default]
    #[serde(rename = "10-90")]
    TenNinety,
    /// From `t = 0` to the first 100% crossing.
    #[serde(rename = "0-100")]
    ZeroHundred,
}

/// `None` marks a value the response does not define (no steady state,
/// non-finite samples, a level never reached, or no settling within the
/// horizon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetrics {
    pub overshoot_percent: Option<f64>,
    pub rise_time: Option<f64>,
    pub settling_time: Option<f64>,
    pub steady_state: Option<f64>,
    pub stable: bool,
}

impl ResponseMetrics {
    fn unstable() -> Self {
        Self {
            overshoot_percent: None,
            rise_time: None,
            settling_time: None,
            steady_state: None,
            stable: false,
        }
    }
}

pub fn analyze(resp: &StepResponse) -> Result<ResponseMetrics> {
    analyze_with(resp, RiseTimeConvention::default())
}

pub fn analyze_with(resp: &StepResponse, convention: RiseTimeConvention) -> Result<ResponseMetrics> {
    let y = &resp.samples;
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Ok(ResponseMetrics::unstable());
    }

    let tail = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n);
    let tail_samples = &y[n - tail..];
    let steady_state = tail_samples.iter().sum::<f64>() / tail as f64;
    let stable = tail_samples
        .iter()
        .all(|v| (v - steady_state).abs() <= STABILITY_BAND * steady_state.abs());

    if steady_state == 0.0 {
        return Ok(ResponseMetrics {
            steady_state: Some(steady_state),
            stable,
            ..ResponseMetrics::unstable()
        });
    }

    let u: Vec<f64> = y.iter().map(|v| v / steady_state).collect();
    let h = resp.time_step;

    let peak = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overshoot_percent = ((peak - 1.0) * 100.0).max(0.0);

    let rise_time = match convention {
        RiseTimeConvention::TenNinety => {
            match (first_crossing(&u, 0.1), first_crossing(&u, 0.9)) {
                (Some(lo), Some(hi)) => Some(h * (hi - lo)),
                _ => None,
            }
        }
        RiseTimeConvention::ZeroHundred => first_crossing(&u, 1.0).map(|k| h * k),
    };

    Ok(ResponseMetrics {
        overshoot_percent: Some(overshoot_percent),
        rise_time,
        settling_time: settling_index(&u).map(|k| h * k),
        steady_state: Some(steady_state),
        stable,
    })
}

/// Fractional sample index at which `u` first reaches `level`, linearly
/// interpolated.
fn first_crossing(u: &[f64], level: f64) -> Option<f64> {
    let k = u.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(0.0);
    }
    let (a, b) = (u[k - 1], u[k]);
    Some((k - 1) as f64 + (level - a) / (b - a))
}

/// Fractional sample index after which `u` stays inside `1 ± band`.
fn settling_index(u: &[f64]) -> Option<f64> {
    let outside = |v: f64| (v - 1.0).abs() > SETTLING_BAND;
    let Some(k) = u.iter().rposition(|&v| outside(v)) else {
        return Some(0.0);
    };
    if k + 1 == u.len() {
        return None;
    }
    let (a, b) = (u[k], u[k + 1]);
    let edge = if a > 1.0 { 1.0 + SETTLING_BAND } else { 1.0 - SETTLING_BAND };
    Some(k as f64 + (edge - a) / (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sampled(h: f64, n: usize, f: impl Fn(f64) -> f64) -> StepResponse {
        StepResponse::new(h, (0..n).map(|k| f(k as f64 * h)).collect())
    }

    fn second_order(zeta: f64, w0: f64) -> impl Fn(f64) -> f64 {
        let wd = w0 * (1.0 - zeta * zeta).sqrt();
        move |t| {
            1.0 - (-zeta * w0 * t).exp() * ((wd * t).cos() + zeta / (1.0 - zeta * zeta).sqrt() * (wd * t).sin())
        }
    }

    #[test]
    fn constant_response() {
        let m = analyze(&StepResponse::new(0.1, vec![1.0; 50])).unwrap();
        assert_eq!(m.overshoot_percent, Some(0.0));
        assert_eq!(m.rise_time, Some(0.0));
        assert_eq!(m.settling_time, Some(0.0));
        assert_eq!(m.steady_state, Some(1.0));
        assert!(m.stable);
    }

    #[test]
    fn first_order_rise_time() {
        let m = analyze(&sampled(1e-3, 20_001, |t| 1.0 - (-t).exp())).unwrap();
        // the tail mean sits a hair below the final sample
        assert!(m.overshoot_percent.unwrap() < 1e-5);
        // 10% at ln(10/9), 90% at ln(10)
        assert!((m.rise_time.unwrap() - 9f64.ln()).abs() < 0.01);
        assert!((m.settling_time.unwrap() - 50f64.ln()).abs() < 0.01);
        assert!(m.stable);
    }

    #[test]
    fn second_order_overshoot() {
        let zeta: f64 = 0.65;
        let expected = 100.0 * (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp();
        let m = analyze(&sampled(1e-3, 10_001, second_order(zeta, 2.2))).unwrap();
        assert!((m.overshoot_percent.unwrap() - expected).abs() < 0.3);
        assert!((expected - 6.81).abs() < 0.01);
        assert!(m.rise_time.unwrap() <= m.settling_time.unwrap());
    }

    #[test]
    fn zero_hundred_convention() {
        let m = analyze_with(&sampled(1e-3, 10_001, second_order(0.5, 3.0)), RiseTimeConvention::ZeroHundred).unwrap();
        // first reach of the final value: ω_d t = π − arccos ζ
        let wd = 3.0 * (0.75f64).sqrt();
        let exact = (std::f64::consts::PI - 0.5f64.acos()) / wd;
        assert!((m.rise_time.unwrap() - exact).abs() < 5e-3);
    }

    #[test]
    fn non_finite_samples_are_unstable() {
        let m = analyze(&StepResponse::new(0.1, vec![0.0, 1.0, f64::INFINITY])).unwrap();
        assert!(!m.stable);
        assert_eq!(m.overshoot_percent, None);
    }

    #[test]
    fn growing_response_is_unstable() {
        let m = analyze(&sampled(1e-2, 1000, |t| t.exp())).unwrap();
        assert!(!m.stable);
        assert_eq!(m.settling_time, None);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(analyze(&StepResponse::new(0.1, vec![1.0])), Err(Error::TooFewSamples(1))));
    }

    #[test]
    fn zero_steady_state() {
        let m = analyze(&StepResponse::new(0.1, vec![0.0; 10])).unwrap();
        assert_eq!(m.steady_state, Some(0.0));
        assert_eq!(m.overshoot_percent, None);
    }

    proptest! {
        #[test]
        fn amplitude_scaling_invariance(k in 0.01..100.0f64, zeta in 0.2..0.95f64) {
            let base = sampled(1e-2, 2001, second_order(zeta, 2.0));
            let scaled = StepResponse::new(1e-2, base.samples.iter().map(|v| v * k).collect());
            let a = analyze(&base).unwrap();
            let b = analyze(&scaled).unwrap();
            prop_assert!((a.overshoot_percent.unwrap() - b.overshoot_percent.unwrap()).abs() < 1e-9);
            prop_assert!((a.rise_time.unwrap() - b.rise_time.unwrap()).abs() < 1e-9);
            prop_assert!((a.settling_time.unwrap() - b.settling_time.unwrap()).abs() < 1e-9);
        }

        #[test]
        fn time_scaling(k in 0.1..10.0f64, zeta in 0.2..0.95f64) {
            let base = sampled(1e-2, 2001, second_order(zeta, 2.0));
            let stretched = StepResponse::new(1e-2 * k, base.samples.clone());
            let a = analyze(&base).unwrap();
            let b = analyze(&stretched).unwrap();
            assert_relative_eq!(b.rise_time.unwrap(), k * a.rise_time.unwrap(), max_relative = 1e-12);
            assert_relative_eq!(b.settling_time.unwrap(), k * a.settling_time.unwrap(), max_relative = 1e-12);
        }

        #[test]
        fn total_and_deterministic(samples in prop::collection::vec(-10.0..10.0f64, 2..200)) {
            let r = StepResponse::new(0.5, samples);
            prop_assert_eq!(analyze(&r).unwrap(), analyze(&r).unwrap());
        }
    }
}

//! Log-linear least-squares fits of exponential decay.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of samples a fit accepts.
pub const MIN_SAMPLES: usize = 5;

/// Samples must exceed the discretization floor by this factor.
pub const FLOOR_MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub t_start: f64,
    pub t_end: f64,
    /// `γ` in `value ≈ C e^{-γ t}`
    pub rate: f64,
    /// `log C`
    pub log_amplitude: f64,
    /// RMS of the log-linear fit residuals.
    pub residual: f64,
}

/// Fit `log(value) = log C - γ t`; `floor` is the level below which samples
/// are dominated by discretization error (pass 0 when there is none).
pub fn fit_decay_rate(samples: &[(f64, f64)], floor: f64) -> Result<RateFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::RateFit(format!(
            "{} samples; need at least {MIN_SAMPLES}",
            samples.len()
        )));
    }
    if let Some(&(t, v)) = samples.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::RateFit(format!("non-positive value {v:e} at t = {t}")));
    }
    if let Some(&(t, v)) = samples.iter().find(|(_, v)| *v <= FLOOR_MARGIN * floor) {
        return Err(Error::RateFit(format!(
            "value {v:e} at t = {t} within {FLOOR_MARGIN}x of the floor {floor:e}"
        )));
    }
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(t, v) in samples {
        let dt = t - mean_t;
        stt += dt * dt;
        sty += dt * (v.ln() - mean_y);
    }
    if stt == 0.0 {
        return Err(Error::RateFit("all samples at one time".into()));
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let residual = (samples
        .iter()
        .map(|&(t, v)| (v.ln() - intercept - slope * t).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let (t_start, t_end) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.0), b.max(s.0)));
    Ok(RateFit {
        t_start,
        t_end,
        rate: -slope,
        log_amplitude: intercept,
        residual,
    })
}

/// `count` evenly spaced times on `[t_start, t_end]`.
pub fn linspace(t_start: f64, t_end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t_start];
    }
    (0..count)
        .map(|i| t_start + (t_end - t_start) * i as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let samples: Vec<(f64, f64)> = linspace(1.0, 9.0, 20)
            .into_iter()
            .map(|t| (t, 3.0 * (-0.7 * t).exp()))
            .collect();
        let fit = fit_decay_rate(&samples, 0.0).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!((fit.log_amplitude - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn rejections() {
        let few = [(0.0, 1.0), (1.0, 0.5)];
        assert!(fit_decay_rate(&few, 0.0).is_err());
        let neg: Vec<_> = (0..6).map(|i| (i as f64, if i == 3 { -1.0 } else { 1.0 })).collect();
        assert!(fit_decay_rate(&neg, 0.0).is_err());
        let floor: Vec<_> = (0..6).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        assert!(fit_decay_rate(&floor, 1e-3).is_err());
        assert!(fit_decay_rate(&floor, 1e-5).is_ok());
    }
}

//! Normalized cross-correlation index.
//!
//! Both series are mean-removed and zero-padded; for every lag `k`
//!
//! ```text
//! R(k) = |Σᵢ xᵢ y_{i+k}| / √(Σ xᵢ² · Σ yᵢ²)
//! ```
//!
//! over `|k| < L`, `L` the shorter length, with the lag axis reported as
//! `τ = k / L ∈ (−1, 1)`. The sums are evaluated through the FFT.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::SignalSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    /// Normalized lags, ascending.
    pub tau: Vec<f64>,
    /// `R` at each lag, in `[0, 1]`.
    pub r_curve: Vec<f64>,
    pub r_peak: f64,
    pub tau_peak: f64,
    /// Peak lag in samples (positive: `y` lags `x`).
    pub lag_peak: i64,
}

fn centered(s: &SignalSeries) -> Result<(Vec<f64>, f64)> {
    let first = s.samples[0];
    if s.samples.iter().all(|&v| v == first) {
        return Err(Error::ConstantSeries(s.label.clone()));
    }
    let mean = s.mean();
    let out: Vec<f64> = s.samples.iter().map(|v| v - mean).collect();
    let energy = out.iter().map(|v| v * v).sum::<f64>();
    if energy <= f64::MIN_POSITIVE {
        return Err(Error::ConstantSeries(s.label.clone()));
    }
    Ok((out, energy))
}

pub fn cross_correlation(x: &SignalSeries, y: &SignalSeries) -> Result<CorrelationResult> {
    let (xc, ex) = centered(x)?;
    let (yc, ey) = centered(y)?;
    let norm = (ex * ey).sqrt();
    let shorter = xc.len().min(yc.len());

    let nfft = (xc.len() + yc.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    let pad = |v: &[f64]| {
        let mut buf = vec![Complex::new(0.0, 0.0); nfft];
        for (b, &s) in buf.iter_mut().zip(v) {
            b.re = s;
        }
        buf
    };
    let mut xs = pad(&xc);
    let mut ys = pad(&yc);
    fwd.process(&mut xs);
    fwd.process(&mut ys);
    let mut prod: Vec<Complex<f64>> = xs.iter().zip(&ys).map(|(a, b)| a.conj() * b).collect();
    inv.process(&mut prod);
    let scale = 1.0 / nfft as f64;

    let max_lag = shorter as i64 - 1;
    let count = (2 * max_lag + 1) as usize;
    let mut tau = Vec::with_capacity(count);
    let mut r_curve = Vec::with_capacity(count);
    let (mut r_peak, mut lag_peak) = (f64::NEG_INFINITY, 0i64);
    for lag in -max_lag..=max_lag {
        let idx = if lag >= 0 {
            lag as usize
        } else {
            (nfft as i64 + lag) as usize
        };
        let r = (prod[idx].re * scale / norm).abs().clamp(0.0, 1.0);
        // ties go to the lag closest to zero
        if r > r_peak || (r == r_peak && lag.abs() < lag_peak.abs()) {
            r_peak = r;
            lag_peak = lag;
        }
        tau.push(lag as f64 / shorter as f64);
        r_curve.push(r);
    }
    Ok(CorrelationResult {
        tau,
        r_curve,
        r_peak,
        tau_peak: lag_peak as f64 / shorter as f64,
        lag_peak,
    })
}

use super::SignalSeries;
use crate::error::{Error, Result};

pub const ENVELOPE_CUTOFF_HZ: f64 = 2.0;

/// Second-order Butterworth low-pass (bilinear transform), transposed
/// direct form II.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn butterworth_lowpass(cutoff: f64, rate: f64) -> Self {
        let k = (std::f64::consts::PI * cutoff / rate).tan();
        let sqrt2 = std::f64::consts::SQRT_2;
        let norm = 1.0 / (1.0 + sqrt2 * k + k * k);
        let b0 = k * k * norm;
        Self {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - sqrt2 * k + k * k) * norm],
        }
    }

    /// Filter `x` starting from the steady state for a constant input `x[0]`.
    fn run(&self, x: &[f64]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let v = x.first().copied().unwrap_or(0.0);
        let mut z2 = (b2 - a2) * v;
        let mut z1 = (b1 - a1) * v + z2;
        x.iter()
            .map(|&s| {
                let y = b0 * s + z1;
                z1 = b1 * s - a1 * y + z2;
                z2 = b2 * s - a2 * y;
                y
            })
            .collect()
    }

    /// Forward-backward (zero-phase) filtering.
    fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let mut fwd = self.run(x);
        fwd.reverse();
        let mut out = self.run(&fwd);
        out.reverse();
        out
    }
}

/// Full-wave rectify, zero-phase 2 Hz low-pass, and express as % of `mvc`,
/// clipped to `[0, 100]`.
pub fn emg_envelope(raw: &SignalSeries, mvc: f64) -> Result<SignalSeries> {
    if !(mvc > 0.0 && mvc.is_finite()) {
        return Err(Error::InvalidParameter(format!("MVC must be positive, got {mvc}")));
    }
    if raw.rate <= 2.0 * ENVELOPE_CUTOFF_HZ {
        return Err(Error::InvalidParameter(format!(
            "sampling rate {} Hz is too low for a {ENVELOPE_CUTOFF_HZ} Hz envelope",
            raw.rate
        )));
    }
    let rectified: Vec<f64> = raw.samples.iter().map(|v| v.abs()).collect();
    let filtered = Biquad::butterworth_lowpass(ENVELOPE_CUTOFF_HZ, raw.rate).filtfilt(&rectified);
    let samples = filtered
        .into_iter()
        .map(|v| (v / mvc * 100.0).clamp(0.0, 100.0))
        .collect();
    Ok(SignalSeries {
        samples,
        rate: raw.rate,
        label: format!("{} (%MVC)", raw.label),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_gain_is_one() {
        let f = Biquad::butterworth_lowpass(2.0, 1000.0);
        let s: f64 = f.b.iter().sum::<f64>() / (1.0 + f.a[0] + f.a[1]);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_input() {
        let raw = SignalSeries::new(vec![0.0; 500], 1000.0, "AD").unwrap();
        let env = emg_envelope(&raw, 0.3).unwrap();
        assert!(env.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_at_mvc_is_full_scale() {
        let raw = SignalSeries::new(vec![0.42; 2000], 1000.0, "AD").unwrap();
        let env = emg_envelope(&raw, 0.42).unwrap();
        assert!(env.samples.iter().all(|&v| (v - 100.0).abs() < 1e-9));
    }

    #[test]
    fn rejects_bad_mvc_and_rate() {
        let raw = SignalSeries::new(vec![0.1; 20], 1000.0, "AD").unwrap();
        assert!(emg_envelope(&raw, 0.0).is_err());
        assert!(emg_envelope(&raw, -1.0).is_err());
        let slow = SignalSeries::new(vec![0.1; 20], 3.0, "AD").unwrap();
        assert!(emg_envelope(&slow, 1.0).is_err());
    }
}

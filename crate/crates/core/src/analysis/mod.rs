//! Evaluation pipeline: shape similarity of joint trajectories, EMG
//! envelopes, and with/without reduction statistics.

mod emg;
mod io;
mod stats;
mod xcorr;

pub use emg::{emg_envelope, ENVELOPE_CUTOFF_HZ};
pub use io::{read_series_csv, read_series_csv_str, SeriesTable};
pub use stats::{reduction_stats, subject_summary, ColumnSummary, ReductionStats, SubjectSummary};
pub use xcorr::{cross_correlation, CorrelationResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    pub samples: Vec<f64>,
    /// Sampling rate (Hz).
    pub rate: f64,
    pub label: String,
}

impl SignalSeries {
    pub fn new(samples: Vec<f64>, rate: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "series '{label}' needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("series '{label}' has rate {rate}")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "series '{label}' has a non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            rate,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

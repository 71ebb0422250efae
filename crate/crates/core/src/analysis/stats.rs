use serde::{Deserialize, Serialize};

use super::SignalSeries;
use crate::error::{Error, Result};

/// Mean and peak of a signal with and without assistance, and their
/// relative reductions in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub mean_with: f64,
    pub max_with: f64,
    pub mean_without: f64,
    pub max_without: f64,
    /// `100 · (mean_without − mean_with) / mean_without`
    pub delta_mean: f64,
    /// `100 · (max_without − max_with) / max_without`
    pub delta_max: f64,
}

impl ReductionStats {
    /// Build from already-reduced means and maxima.
    pub fn from_summary(mean_with: f64, max_with: f64, mean_without: f64, max_without: f64) -> Result<Self> {
        Ok(Self {
            mean_with,
            max_with,
            mean_without,
            max_without,
            delta_mean: reduction(mean_with, mean_without, "mean")?,
            delta_max: reduction(max_with, max_without, "maximum")?,
        })
    }

    fn columns(&self) -> [f64; 6] {
        [
            self.mean_with,
            self.max_with,
            self.mean_without,
            self.max_without,
            self.delta_mean,
            self.delta_max,
        ]
    }
}

fn reduction(with: f64, without: f64, what: &'static str) -> Result<f64> {
    if without == 0.0 {
        return Err(Error::ZeroReference(what));
    }
    Ok(100.0 * (without - with) / without)
}

pub fn reduction_stats(with_r: &SignalSeries, without_r: &SignalSeries) -> Result<ReductionStats> {
    if with_r.is_empty() || without_r.is_empty() {
        return Err(Error::Empty("reduction series"));
    }
    ReductionStats::from_summary(with_r.mean(), with_r.max(), without_r.mean(), without_r.max())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub mean: f64,
    /// Sample standard deviation (`N − 1`); zero for a single subject.
    pub std: f64,
}

impl ColumnSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("subject list"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(Self { mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectSummary {
    pub mean_with: ColumnSummary,
    pub max_with: ColumnSummary,
    pub mean_without: ColumnSummary,
    pub max_without: ColumnSummary,
    pub delta_mean: ColumnSummary,
    pub delta_max: ColumnSummary,
}

/// Across-subject mean and sample standard deviation of every column.
pub fn subject_summary(subjects: &[ReductionStats]) -> Result<SubjectSummary> {
    if subjects.is_empty() {
        return Err(Error::Empty("subject list"));
    }
    let column = |k: usize| {
        let v: Vec<f64> = subjects.iter().map(|s| s.columns()[k]).collect();
        ColumnSummary::of(&v)
    };
    Ok(SubjectSummary {
        mean_with: column(0)?,
        max_with: column(1)?,
        mean_without: column(2)?,
        max_without: column(3)?,
        delta_mean: column(4)?,
        delta_max: column(5)?,
    })
}

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use wbctl_core::analysis::{
    cross_correlation, emg_envelope, read_series_csv, reduction_stats, ReductionStats, SeriesTable,
};
use wbctl_core::{CorrelationResult, Error};

use crate::failure::{io_failure, Failure};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Recording with assistance (CSV, first column time in seconds).
    #[arg(long = "with", value_name = "CSV")]
    with_path: PathBuf,
    /// Recording without assistance.
    #[arg(long = "without", value_name = "CSV")]
    without_path: PathBuf,
    /// Columns to compare: `name` (same in both files) or `with_name:without_name`.
    /// Default: every column present in both files.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Treat the columns as raw EMG and compare envelopes in % of this MVC.
    #[arg(long)]
    mvc: Option<f64>,
    /// Write analysis.json into this directory instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ColumnReport {
    with_column: String,
    without_column: String,
    reduction: ReductionStats,
    /// Absent when either series is constant.
    correlation: Option<CorrelationResult>,
    correlation_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Report {
    with: String,
    without: String,
    rate: f64,
    envelope_mvc: Option<f64>,
    columns: Vec<ColumnReport>,
}

fn pairs(args: &AnalyzeArgs, with: &SeriesTable, without: &SeriesTable) -> Result<Vec<(String, String)>, Failure> {
    if args.columns.is_empty() {
        let shared: Vec<(String, String)> = with
            .names
            .iter()
            .filter(|n| without.names.contains(n))
            .map(|n| (n.clone(), n.clone()))
            .collect();
        if shared.is_empty() {
            return Err(Failure::Input("the two files share no data columns; use --columns".into()));
        }
        return Ok(shared);
    }
    Ok(args
        .columns
        .iter()
        .map(|c| match c.split_once(':') {
            Some((a, b)) => (a.trim().to_string(), b.trim().to_string()),
            None => (c.trim().to_string(), c.trim().to_string()),
        })
        .collect())
}

pub fn execute(args: &AnalyzeArgs) -> Result<(), Failure> {
    let with = read_series_csv(&args.with_path)?;
    let without = read_series_csv(&args.without_path)?;
    if ((with.rate - without.rate) / with.rate).abs() > 1e-6 {
        return Err(Failure::Input(format!(
            "sampling rates differ: {} Hz in {}, {} Hz in {}",
            with.rate,
            args.with_path.display(),
            without.rate,
            args.without_path.display()
        )));
    }

    let mut columns = Vec::new();
    for (a, b) in pairs(args, &with, &without)? {
        let mut x = with.series(&a)?;
        let mut y = without.series(&b)?;
        if let Some(mvc) = args.mvc {
            x = emg_envelope(&x, mvc)?;
            y = emg_envelope(&y, mvc)?;
        }
        let reduction = reduction_stats(&x, &y)?;
        let (correlation, correlation_error) = match cross_correlation(&x, &y) {
            Ok(c) => (Some(c), None),
            Err(e @ Error::ConstantSeries(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        columns.push(ColumnReport {
            with_column: a,
            without_column: b,
            reduction,
            correlation,
            correlation_error,
        });
    }

    let report = Report {
        with: args.with_path.display().to_string(),
        without: args.without_path.display().to_string(),
        rate: with.rate,
        envelope_mvc: args.mvc,
        columns,
    };
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            let path = dir.join("analysis.json");
            let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
            serde_json::to_writer_pretty(BufWriter::new(file), &report).map_err(|e| io_failure(&path, e))?;
            println!("{}", path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)
                .map_err(|e| Failure::Input(format!("writing report: {e}")))?;
            let _ = writeln!(out);
        }
    }
    Ok(())
}

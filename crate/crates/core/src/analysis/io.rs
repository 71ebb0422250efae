use std::path::Path;

use super::SignalSeries;
use crate::error::{Error, Result};

/// Columns of a CSV file whose first column is time (s).
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub origin: String,
    pub time: Vec<f64>,
    pub names: Vec<String>,
    /// `columns[k][i]`: column `names[k]` at row `i`.
    pub columns: Vec<Vec<f64>>,
    /// Rate implied by the time column (Hz).
    pub rate: f64,
}

impl SeriesTable {
    pub fn series(&self, name: &str) -> Result<SignalSeries> {
        let k = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown column '{name}' in {} (available: {})",
                    self.origin,
                    self.names.join(", ")
                ))
            })?;
        SignalSeries::new(self.columns[k].clone(), self.rate, name)
    }
}

pub fn read_series_csv(path: &Path) -> Result<SeriesTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    read_series_csv_str(&text, &path.display().to_string())
}

/// Parse CSV text with a header row. Errors carry the 1-based line number.
pub fn read_series_csv_str(text: &str, origin: &str) -> Result<SeriesTable> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.len() < 2 {
        return Err(parse_err(1, "expected a time column followed by at least one data column".into()));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut time = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut values = record.iter().enumerate().map(|(k, field)| {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("field {} ('{field}') is not a finite number", k + 1)))
        });
        let t = values.next().unwrap()?;
        if let Some(&prev) = time.last() {
            if t <= prev {
                return Err(parse_err(line, format!("time {t} does not increase")));
            }
        }
        time.push(t);
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v?);
        }
    }
    if time.len() < 2 {
        return Err(Error::Empty("CSV needs at least two data rows"));
    }
    let rate = (time.len() - 1) as f64 / (time[time.len() - 1] - time[0]);
    Ok(SeriesTable {
        origin: origin.to_string(),
        time,
        names,
        columns,
        rate,
    })
}

//! CSV and JSON files.

use std::fs;
use std::path::Path;

use serde::Serialize;
use tspca_core::{Matrix, MultivariateSeries};

use crate::error::{CliError, CliResult};

/// A numeric table read from CSV.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub names: Vec<String>,
    pub series: MultivariateSeries,
    /// Set when a non-numeric leading column (dates) was dropped.
    pub skipped_column: Option<String>,
}

/// Reads a comma-separated file with a mandatory header. A leading column
/// whose first value is not a number is treated as a date column and
/// skipped. `columns` selects variables by header name or 1-based position
/// among the remaining columns.
pub fn read_series_csv(path: &Path, columns: Option<&[String]>) -> CliResult<SeriesTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_series_csv(&text, columns)
}

pub fn parse_series_csv(text: &str, columns: Option<&[String]>) -> CliResult<SeriesTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Malformed(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(CliError::Malformed("missing header row".into()));
    }
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Malformed(format!("row {}: {e}", i + 2)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(CliError::Malformed("no data rows".into()));
    }
    let first_is_date = header.len() > 1 && records[0][0].parse::<f64>().is_err();
    let offset = usize::from(first_is_date);
    let available = &header[offset..];

    let selected: Vec<usize> = match columns {
        None => (0..available.len()).collect(),
        Some(list) => list
            .iter()
            .map(|c| select_column(available, c))
            .collect::<CliResult<_>>()?,
    };
    if selected.is_empty() {
        return Err(CliError::Malformed("no columns selected".into()));
    }

    let n = records.len();
    let p = selected.len();
    let mut data = Vec::with_capacity(n * p);
    for (t, rec) in records.iter().enumerate() {
        for &j in &selected {
            let raw = &rec[j + offset];
            let v: f64 = raw.parse().map_err(|_| {
                CliError::Malformed(format!("row {}, column '{}': cannot parse '{raw}'", t + 2, available[j]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Malformed(format!(
                    "row {}, column '{}': non-finite value '{raw}'",
                    t + 2,
                    available[j]
                )));
            }
            data.push(v);
        }
    }
    let series = MultivariateSeries::new(Matrix::from_row_major(n, p, data))
        .map_err(|e| CliError::Malformed(e.to_string()))?;
    Ok(SeriesTable {
        names: selected.iter().map(|&j| available[j].clone()).collect(),
        series,
        skipped_column: first_is_date.then(|| header[0].clone()),
    })
}

fn select_column(available: &[String], key: &str) -> CliResult<usize> {
    if let Some(j) = available.iter().position(|h| h == key) {
        return Ok(j);
    }
    match key.parse::<usize>() {
        Ok(k) if (1..=available.len()).contains(&k) => Ok(k - 1),
        _ => Err(CliError::Malformed(format!("unknown column '{key}'"))),
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

pub fn write_csv<H, R>(path: &Path, header: &[H], rows: impl IntoIterator<Item = R>) -> CliResult<()>
where
    H: AsRef<str>,
    R: IntoIterator,
    R::Item: AsRef<str>,
{
    let to_io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(header.iter().map(|h| h.as_ref())).map_err(to_io)?;
    for row in rows {
        let row: Vec<String> = row.into_iter().map(|c| c.as_ref().to_string()).collect();
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

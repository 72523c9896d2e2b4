//! Bid-log preprocessing: drop the top tail, rescale to `(0, 1]`.
//!
//! Input is either one nonnegative number per line or a CSV file with a
//! header containing a `bid` column. Values at or above the empirical
//! `q`-quantile (the order statistic of rank `ceil(q n)`) are dropped, unless
//! `q = 1`, and the survivors are divided by their maximum.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::format::fmt12;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("no positive values left after filtering")]
    EmptyAfterFilter,
    #[error("quantile must lie in (0, 1], got {0}")]
    InvalidQuantile(f64),
}

pub const DEFAULT_QUANTILE: f64 = 0.9;

/// Raw bids as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BidLog {
    pub raw_values: Vec<f64>,
    pub source_path: String,
}

fn check_value(line: usize, text: &str) -> Result<f64, IngestError> {
    let v: f64 = text.trim().parse().map_err(|_| IngestError::ParseError {
        line,
        reason: format!("`{}` is not a number", text.trim()),
    })?;
    if !v.is_finite() || v < 0.0 {
        return Err(IngestError::ParseError {
            line,
            reason: format!("bid must be finite and nonnegative, got {v}"),
        });
    }
    Ok(v)
}

fn parse_csv(text: &str) -> Result<Vec<f64>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| IngestError::ParseError {
        line: 1,
        reason: e.to_string(),
    })?;
    let col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("bid"))
        .ok_or_else(|| IngestError::ParseError {
            line: 1,
            reason: "header has no `bid` column".into(),
        })?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = rec.get(col).ok_or_else(|| IngestError::ParseError {
            line,
            reason: "missing `bid` field".into(),
        })?;
        out.push(check_value(line, field)?);
    }
    Ok(out)
}

/// Parses a plain list or a CSV with a `bid` column.
pub fn parse_bids(text: &str) -> Result<Vec<f64>, IngestError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(head) if head.parse::<f64>().is_err() => parse_csv(text),
        _ => {
            let mut out = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                out.push(check_value(i + 1, line)?);
            }
            Ok(out)
        }
    }
}

pub fn read_bid_log(path: &Path) -> Result<BidLog, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(BidLog {
        raw_values: parse_bids(&text)?,
        source_path: path.display().to_string(),
    })
}

/// Drops values at or above the `q`-quantile and rescales by the largest
/// survivor. Returns sorted values.
pub fn normalize(values: &[f64], quantile: f64) -> Result<Vec<f64>, IngestError> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(IngestError::InvalidQuantile(quantile));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if quantile < 1.0 && !sorted.is_empty() {
        let rank = ((quantile * sorted.len() as f64).ceil() as usize).max(1);
        let cut = sorted[rank - 1];
        sorted.retain(|v| *v < cut);
    }
    let top = match sorted.last() {
        Some(&m) if m > 0.0 => m,
        _ => return Err(IngestError::EmptyAfterFilter),
    };
    for v in &mut sorted {
        *v /= top;
    }
    Ok(sorted)
}

pub fn load_and_normalize(path: &Path, quantile: f64) -> Result<Vec<f64>, IngestError> {
    normalize(&read_bid_log(path)?.raw_values, quantile)
}

/// One value per line, 12 significant digits; readable as `empirical:@path`.
pub fn write_empirical<W: Write>(mut out: W, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        writeln!(out, "{}", fmt12(*v))?;
    }
    out.flush()
}

//! CSV and JSON writers with fixed float formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ermakov_core::report::fmt17;
use serde::Serialize;

use crate::error::CliError;

pub fn csv_string<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt17(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    fs::write(path, csv_string(header, rows))?;
    Ok(())
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, json_string(value)?)?;
    Ok(())
}

/// Parses a numeric CSV with a header line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{} is empty", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), n + 2)))?;
        if row.len() != header.len() {
            return Err(CliError::Config(format!("{} line {}: expected {} columns", path.display(), n + 2, header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

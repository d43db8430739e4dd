//! Reading and writing single-column numeric CSV files.

use std::fmt::Write as _;
use std::path::Path;

use lspacf::TimeSeries;

use crate::error::{CliError, Result};

/// Reads a series from a CSV file; see [`parse_csv`].
pub fn ingest_csv(path: &Path, column: Option<&str>) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text, column, path)
}

/// Parses newline-delimited numeric values with an optional header row.
///
/// Files with several comma-separated columns need `column`, either a header
/// name or a 1-based index. Blank rows, unparseable cells and non-finite
/// values are errors that cite their 1-based line number.
pub fn parse_csv(text: &str, column: Option<&str>, path: &Path) -> Result<TimeSeries> {
    let err = |line: Option<usize>, message: String| CliError::Input {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let lines: Vec<&str> = lines
        .iter()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let Some(first) = lines.first() else {
        return Err(err(None, "empty file".into()));
    };
    if first.trim().is_empty() {
        return Err(err(Some(1), "blank row".into()));
    }
    let head = split(first);
    let is_header = head.iter().any(|f| f.parse::<f64>().is_err());
    let width = head.len();
    let index = match (column, width) {
        (None, 1) => 0,
        (None, _) => {
            return Err(err(
                Some(1),
                format!("{width} columns found; choose one with --column"),
            ))
        }
        (Some(sel), _) => {
            if let Some(pos) = head.iter().position(|h| is_header && *h == sel) {
                pos
            } else {
                match sel.parse::<usize>() {
                    Ok(k) if (1..=width).contains(&k) => k - 1,
                    _ => {
                        return Err(err(
                            Some(1),
                            format!("column `{sel}` not found among {width} columns"),
                        ))
                    }
                }
            }
        }
    };
    let start = usize::from(is_header);
    let mut values = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate().skip(start) {
        let lineno = i + 1;
        if line.trim().is_empty() {
            return Err(err(Some(lineno), "blank row".into()));
        }
        let fields = split(line);
        if fields.len() != width {
            return Err(err(
                Some(lineno),
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let cell = fields[index];
        let v: f64 = cell
            .parse()
            .map_err(|_| err(Some(lineno), format!("unparseable cell `{cell}`")))?;
        if !v.is_finite() {
            return Err(err(Some(lineno), format!("non-finite value `{cell}`")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(err(None, "no data rows".into()));
    }
    Ok(TimeSeries::new(values)?)
}

fn split(line: &str) -> Vec<&str> {
    line.split(',')
        .map(|f| f.trim().trim_matches('"'))
        .collect()
}

/// One-column CSV with header `x`. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn series_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 22 + 2);
    out.push_str("x\n");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

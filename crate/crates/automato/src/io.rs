//! Text-file ingestion: whitespace- or comma-delimited points, one per
//! row, and companion integer label files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Parses a point cloud: one point per non-empty row, fields split on
/// commas and/or whitespace.
pub fn load_points(path: &Path) -> Result<PointCloud> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "{}:{}: non-numeric field {f:?}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    PointCloud::from_rows(&rows)
}

/// Parses a label file: one integer per non-empty row (-1 marks noise).
pub fn load_labels(path: &Path) -> Result<Vec<i64>> {
    let text = read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<i64>().map_err(|_| {
            Error::Parse(format!(
                "{}:{}: non-integer label {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        labels.push(v);
    }
    if labels.is_empty() {
        return Err(Error::Parse(format!("{}: empty label file", path.display())));
    }
    Ok(labels)
}

/// Writes one label per line.
pub fn write_labels(path: &Path, labels: &[i64]) -> Result<()> {
    let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

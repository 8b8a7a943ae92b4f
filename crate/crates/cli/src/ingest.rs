//! CSV ingestion: standardize, drop a class, trim to the `r_max` ball.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use section_pursuit::slicing::Dataset;

use crate::error::{CliError, CliResult};

/// Quantile of row norms used as `r_max` when none is given.
pub const DEFAULT_RMAX_QUANTILE: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub input: PathBuf,
    pub class_column: Option<String>,
    pub drop_class: Option<String>,
    pub scale: bool,
    /// Trimming radius; `None` uses the norm quantile.
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestionReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub rows_trimmed: usize,
    pub rows_dropped_by_class: usize,
    pub columns: Vec<String>,
    pub column_means: Vec<f64>,
    pub column_sds: Vec<f64>,
    pub scaled: bool,
    pub r_max: f64,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub report: IngestionReport,
    /// Lower-case hex SHA-256 of the input file.
    pub digest: String,
}

pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Linear-interpolation quantile of unsorted values.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Read and prepare a CSV file.
///
/// Columns are standardized over all rows read, then rows of the dropped
/// class are removed, then rows with norm above `r_max` are trimmed.
pub fn ingest(options: &IngestOptions) -> CliResult<Ingested> {
    if options.drop_class.is_some() && options.class_column.is_none() {
        return Err(CliError::Config("--drop-class needs --class-column".into()));
    }
    if let Some(r) = options.r_max {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::Config(format!("r_max = {r} must be positive")));
        }
    }
    let path = &options.input;
    let digest = file_digest(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let class_idx = match &options.class_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::Input(format!("class column {name:?} not found in header")))?,
        ),
        None => None,
    };
    let columns: Vec<String> =
        headers.iter().enumerate().filter(|(i, _)| Some(*i) != class_idx).map(|(_, h)| h.clone()).collect();
    let p = columns.len();
    if p < 3 {
        return Err(CliError::Input(format!("need at least 3 numeric columns, found {p}")));
    }

    let mut values = Vec::new();
    let mut classes = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| CliError::Input(format!("line {line}: {e}")))?;
        if record.len() != headers.len() {
            return Err(CliError::Input(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        for (i, cell) in record.iter().enumerate() {
            if Some(i) == class_idx {
                classes.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::Input(format!("line {line}, column {:?}: cannot parse {cell:?} as a number", headers[i]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!("line {line}, column {:?}: non-finite value", headers[i])));
            }
            values.push(v);
        }
    }
    let rows_read = values.len() / p;
    if rows_read < 2 {
        return Err(CliError::Input(format!("{}: need at least 2 data rows", path.display())));
    }

    let n = rows_read as f64;
    let mut means = vec![0.0; p];
    for row in values.chunks_exact(p) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut sds = vec![0.0; p];
    for row in values.chunks_exact(p) {
        for ((s, v), m) in sds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    sds.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt());
    if options.scale {
        if let Some(j) = sds.iter().position(|s| *s == 0.0) {
            return Err(CliError::Input(format!("column {:?} has zero variance and cannot be scaled", columns[j])));
        }
        for row in values.chunks_exact_mut(p) {
            for ((v, m), s) in row.iter_mut().zip(&means).zip(&sds) {
                *v = (*v - m) / s;
            }
        }
    }

    let kept_class: Vec<usize> = (0..rows_read)
        .filter(|&i| match (&options.drop_class, class_idx) {
            (Some(drop), Some(_)) => &classes[i] != drop,
            _ => true,
        })
        .collect();
    let rows_dropped_by_class = rows_read - kept_class.len();
    if kept_class.is_empty() {
        return Err(CliError::Input("every row was dropped by class".into()));
    }
    let norm = |i: usize| values[i * p..(i + 1) * p].iter().map(|v| v * v).sum::<f64>().sqrt();
    let norms: Vec<f64> = kept_class.iter().map(|&i| norm(i)).collect();
    let r_max = match options.r_max {
        Some(r) => r,
        None => quantile(&norms, DEFAULT_RMAX_QUANTILE),
    };
    if !(r_max > 0.0) {
        return Err(CliError::Numeric("all rows sit at the origin; r_max would be 0".into()));
    }
    let mut kept = Vec::with_capacity(kept_class.len() * p);
    for (&i, &r) in kept_class.iter().zip(&norms) {
        if r <= r_max {
            kept.extend_from_slice(&values[i * p..(i + 1) * p]);
        }
    }
    let rows_kept = kept.len() / p;
    if rows_kept == 0 {
        return Err(CliError::Input(format!("no rows within r_max = {r_max}")));
    }
    let dataset = Dataset::new(kept, p, r_max)?;
    Ok(Ingested {
        dataset,
        report: IngestionReport {
            rows_read,
            rows_kept,
            rows_trimmed: kept_class.len() - rows_kept,
            rows_dropped_by_class,
            columns,
            column_means: means,
            column_sds: sds,
            scaled: options.scale,
            r_max,
        },
        digest,
    })
}

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tabasco::Complex64;

/// Bad invocation: conflicting flags, unusable config. Exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Library errors caused by the invocation rather than the data.
pub fn classify(e: tabasco::Error) -> anyhow::Error {
    match e {
        tabasco::Error::Regime(_) | tabasco::Error::InvalidArgument(_) | tabasco::Error::Parse(_) => {
            usage(e.to_string())
        }
        other => other.into(),
    }
}

/// Reads a numeric CSV (rows are observations). Row and column numbers in
/// errors are 1-based and count the header line when there is one.
pub fn read_matrix(path: &Path, header: bool) -> Result<DMatrix<f64>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut values = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1 + usize::from(header);
        let record = record.with_context(|| format!("{}: row {row}: unreadable record", path.display()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match ncols {
            None => ncols = Some(record.len()),
            Some(m) if m != record.len() => {
                bail!("{}: row {row}: expected {m} columns, found {}", path.display(), record.len())
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                anyhow::anyhow!("{}: row {row}, column {}: cannot parse `{field}` as a number", path.display(), j + 1)
            })?;
            if !v.is_finite() {
                bail!("{}: row {row}, column {}: non-finite value `{field}`", path.display(), j + 1);
            }
            values.push(v);
        }
        nrows += 1;
    }
    let ncols = match ncols {
        Some(m) if nrows > 0 => m,
        _ => bail!("{}: no data rows", path.display()),
    };
    Ok(DMatrix::from_row_slice(nrows, ncols, &values))
}

/// Interprets consecutive column pairs as (re, im).
pub fn complex_from_pairs(m: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    if !m.ncols().is_multiple_of(2) {
        return Err(usage(format!(
            "--complex needs (re, im) column pairs, but the input has {} columns",
            m.ncols()
        )));
    }
    Ok(DMatrix::from_fn(m.nrows(), m.ncols() / 2, |i, j| {
        Complex64::new(m[(i, 2 * j)], m[(i, 2 * j + 1)])
    }))
}

pub fn complex_to_pairs(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), 2 * m.ncols(), |i, j| {
        let z = m[(i, j / 2)];
        if j % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let rows = matrix_rows(m)
        .into_iter()
        .map(|r| r.into_iter().map(fmt_f64).collect())
        .collect::<Vec<Vec<String>>>();
    write_table(path, None, &rows)
}

pub fn write_table(path: &Path, header: Option<&[&str]>, rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// The JSON file mirroring a CSV output.
pub fn json_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Parses a TOML config; malformed or unknown content is a usage error.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

//! File helpers: single/multi-column CSV with 17 significant digits and
//! atomic (write-then-rename) output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `data/path.csv` -> `data/path.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = parent_dir(path);
    let mut tmp = NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json_atomic<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// CSV text with a header row and one column per entry of `columns`.
pub fn columns_csv(headers: &[&str], columns: &[&[f64]]) -> Result<String> {
    if headers.len() != columns.len() {
        return Err(Error::domain("header/column count mismatch"));
    }
    let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(headers)?;
    for i in 0..rows {
        let rec: Vec<String> = columns
            .iter()
            .map(|c| c.get(i).map(|&v| fmt_f64(v)).unwrap_or_default())
            .collect();
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_columns_csv(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    write_atomic(path, columns_csv(headers, columns)?.as_bytes())
}

pub fn write_column_csv(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    write_columns_csv(path, &[header], &[values])
}

/// Read a table of floats. A first row that does not parse as numbers is
/// taken as the header; otherwise columns are named `c0, c1, ...`.
pub fn read_table_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    parse_table_csv(&text)
}

pub fn parse_table_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut headers: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().map(str::trim).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if columns.is_empty() {
                    columns = vec![Vec::new(); vals.len()];
                }
                if vals.len() != columns.len() {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} fields, found {}",
                        line + 1,
                        columns.len(),
                        vals.len()
                    )));
                }
                for (c, v) in columns.iter_mut().zip(vals) {
                    c.push(v);
                }
            }
            Err(_) if line == 0 => {
                headers = Some(fields.iter().map(|s| s.to_string()).collect());
                columns = vec![Vec::new(); fields.len()];
            }
            Err(e) => {
                return Err(Error::Parse(format!("line {}: {e}", line + 1)));
            }
        }
    }
    let headers =
        headers.unwrap_or_else(|| (0..columns.len()).map(|i| format!("c{i}")).collect());
    Ok((headers, columns))
}

/// Read the first column of a CSV file.
pub fn read_column_csv(path: &Path) -> Result<Vec<f64>> {
    let (_, mut cols) = read_table_csv(path)?;
    if cols.is_empty() {
        return Err(Error::Parse(format!("{} holds no data", path.display())));
    }
    Ok(cols.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let a = [1.0, 0.1, -3.5e-7];
        let b = [2.0, std::f64::consts::PI, 4.0];
        let text = columns_csv(&["a", "b"], &[&a, &b]).unwrap();
        assert!(text.starts_with("a,b\n"));
        let (h, cols) = parse_table_csv(&text).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(cols[0], a);
        assert_eq!(cols[1], b);
    }

    #[test]
    fn headerless_and_bad_rows() {
        let (h, cols) = parse_table_csv("1.5\n2.5\n").unwrap();
        assert_eq!(h, vec!["c0"]);
        assert_eq!(cols[0], vec![1.5, 2.5]);
        assert!(parse_table_csv("x\n1\nfoo\n").is_err());
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        write_column_csv(&p, "value", &[1.0, 2.0]).unwrap();
        assert_eq!(read_column_csv(&p).unwrap(), vec![1.0, 2.0]);
        assert_eq!(sidecar_path(&p), dir.path().join("v.json"));
    }
}

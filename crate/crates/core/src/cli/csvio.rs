//! Numeric CSV files: a header row, then one record per row, floats with
//! 17 significant digits and LF line endings.

use std::path::Path;

use crate::error::{Error, Result};

/// A header plus rows of numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Shortest text that round-trips is not stable across formatters, so
/// every float is written as `{:.16e}`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("{} row {}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Rows of mixed text, written verbatim.
pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, t: &Table) -> Result<()> {
    let rows: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(|v| fmt_f64(*v)).collect()).collect();
    write_records(path, &t.header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/t.csv");
        let t = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec![std::f64::consts::PI, -1e-300], vec![0.1 + 0.2, 7.0]],
        };
        write_table(&path, &t).unwrap();
        assert_eq!(read_table(&path).unwrap(), t);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("a,b\n3.1415926535897931e0,"));
        assert!(!text.contains('\r'));
        assert_eq!(t.column("b").unwrap(), vec![-1e-300, 7.0]);
        assert!(t.column("c").is_err());
    }

    #[test]
    fn bad_number_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "a\nxyz\n").unwrap();
        assert!(read_table(&path).is_err());
    }
}

//! Numeric tables with exact round-trip CSV.

use std::path::Path;

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| LabError::Config(format!("table `{}` has no column `{name}`", self.name)))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Rows as maps from column name, for readable evaluation code.
    pub fn records(&self) -> impl Iterator<Item = Record<'_>> {
        self.rows.iter().map(move |r| Record { table: self, row: r })
    }

    /// Floats use the shortest representation that parses back exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| LabError::Config(format!("bad table path {}", path.display())))?
            .to_string();
        let mut r = csv::Reader::from_path(path)?;
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| LabError::Config(format!("{}: bad number `{f}`: {e}", path.display())))
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(LabError::Dimension {
                    left: row.len(),
                    right: columns.len(),
                });
            }
            rows.push(row);
        }
        Ok(Self { name, columns, rows })
    }
}

#[derive(Clone, Copy)]
pub struct Record<'a> {
    table: &'a Table,
    row: &'a [f64],
}

impl Record<'_> {
    /// Value of `column`; NaN if the column is missing.
    pub fn get(&self, column: &str) -> f64 {
        self.table
            .columns
            .iter()
            .position(|c| c == column)
            .map_or(f64::NAN, |i| self.row[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec![0.1 + 0.2, f64::NAN]);
        t.push(vec![-1e-300, 1.0 / 3.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demo.csv");
        t.write_csv(&path).unwrap();
        let back = Table::read_csv(&path).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[1], t.rows[1]);
        assert_eq!(back.rows[0][0], t.rows[0][0]);
        assert!(back.rows[0][1].is_nan());
        assert!(back.column("c").is_err());
    }
}

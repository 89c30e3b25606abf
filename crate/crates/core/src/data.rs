//! Column-oriented numeric tables with CSV IO.
//!
//! Category columns are stored as `f64` holding small non-negative integers;
//! [`Dataset::category`] converts them back.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Dataset> {
        if names.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != columns[0].len()) {
            return Err(Error::InvalidData(format!(
                "ragged columns: {} vs {} rows",
                c.len(),
                columns[0].len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidData(format!("duplicate column '{n}'")));
            }
        }
        Ok(Dataset { names, columns })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Dataset> {
        let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::InvalidData(format!(
                    "row {r} has {} fields, expected {}",
                    row.len(),
                    names.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        Dataset::new(names, columns)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn has(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// A column as category codes; fails on negative or fractional values.
    pub fn category(&self, name: &str) -> Result<Vec<u32>> {
        self.column(name)?
            .iter()
            .enumerate()
            .map(|(r, &v)| {
                if v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
                    Ok(v as u32)
                } else {
                    Err(Error::InvalidData(format!(
                        "column '{name}' row {r}: {v} is not a category code"
                    )))
                }
            })
            .collect()
    }

    /// Number of categories of a column (max code + 1).
    pub fn cardinality(&self, name: &str) -> Result<u32> {
        Ok(self.category(name)?.into_iter().max().map_or(0, |m| m + 1))
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if self.has(name) {
            return Err(Error::InvalidData(format!("duplicate column '{name}'")));
        }
        if !self.columns.is_empty() && values.len() != self.n_rows() {
            return Err(Error::InvalidData(format!(
                "column '{name}' has {} rows, expected {}",
                values.len(),
                self.n_rows()
            )));
        }
        self.names.push(name.to_string());
        self.columns.push(values);
        Ok(())
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
        }
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::Reader::from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidData(format!("row {}: '{f}' is not a number", r + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Dataset::from_rows(names, &rows)
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for r in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| format_value(c[r])))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        Dataset::from_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_writer(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

//! Column tables with CSV and JSON output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "values", rename_all = "lowercase")]
pub enum ColumnData {
    Float(Vec<f64>),
    Int(Vec<i64>),
    Text(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Float(v) => v.len(),
            ColumnData::Int(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell(&self, i: usize) -> String {
        match self {
            ColumnData::Float(v) => fmt_float(v[i]),
            ColumnData::Int(v) => v[i].to_string(),
            ColumnData::Text(v) => v[i].clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub point: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub code_version: String,
    pub created: String,
    pub diagnostics: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub metadata: Metadata,
    pub errors: Vec<ErrorRow>,
}

/// Float with 12 significant digits, printed in the shortest exact form.
pub fn fmt_float(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let plain = format!("{rounded}");
    let sci = format!("{rounded:e}");
    if plain.len() <= sci.len() + 4 {
        plain
    } else {
        sci
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Text,
}

impl ResultTable {
    pub fn new(name: &str, schema: &[(&str, Kind)]) -> Self {
        let columns = schema
            .iter()
            .map(|&(n, k)| Column {
                name: n.to_string(),
                data: match k {
                    Kind::Float => ColumnData::Float(Vec::new()),
                    Kind::Int => ColumnData::Int(Vec::new()),
                    Kind::Text => ColumnData::Text(Vec::new()),
                },
            })
            .collect();
        Self {
            name: name.to_string(),
            columns,
            metadata: Metadata {
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                created: chrono::Utc::now().to_rfc3339(),
                ..Metadata::default()
            },
            errors: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(LabError::Invariant(format!(
                "row has {} cells, table {} has {} columns",
                row.len(),
                self.name,
                self.columns.len()
            )));
        }
        for (col, v) in self.columns.iter().zip(&row) {
            let ok = match (&col.data, v) {
                (ColumnData::Float(_), Value::Float(x)) => x.is_finite(),
                (ColumnData::Int(_), Value::Int(_)) | (ColumnData::Text(_), Value::Text(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(LabError::Invariant(format!("bad value {v:?} for column {}", col.name)));
            }
        }
        for (col, v) in self.columns.iter_mut().zip(row) {
            match (&mut col.data, v) {
                (ColumnData::Float(c), Value::Float(x)) => c.push(x),
                (ColumnData::Int(c), Value::Int(x)) => c.push(x),
                (ColumnData::Text(c), Value::Text(x)) => c.push(x),
                _ => unreachable!(),
            }
        }
        Ok(())
    }

    /// Records a failed sweep point instead of a row.
    pub fn push_error(&mut self, point: impl Into<String>, message: impl ToString) {
        self.errors.push(ErrorRow {
            point: point.into(),
            message: message.to_string(),
        });
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns.iter().find(|c| c.name == name).map(|c| &c.data)
    }

    pub fn floats(&self, name: &str) -> Option<&[f64]> {
        match self.column(name)? {
            ColumnData::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn ints(&self, name: &str) -> Option<&[i64]> {
        match self.column(name)? {
            ColumnData::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn diag(&mut self, key: &str, value: impl ToString) {
        self.metadata.diagnostics.insert(key.to_string(), value.to_string());
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for i in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c.data.cell(i)))?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Format(e.to_string()))
    }

    pub fn errors_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["point", "message"])?;
        for e in &self.errors {
            w.write_record([&e.point, &e.message])?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Format(e.to_string()))
    }

    /// Writes `<name>.csv` (and `<name>.errors.csv` when points failed).
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(LabError::io(dir))?;
        let mut out = Vec::new();
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, self.to_csv()?).map_err(LabError::io(&path))?;
        out.push(path);
        if !self.errors.is_empty() {
            let path = dir.join(format!("{}.errors.csv", self.name));
            fs::write(&path, self.errors_csv()?).map_err(LabError::io(&path))?;
            out.push(path);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(2.0), "2");
        assert_eq!(fmt_float(1.234567890123456e-9), "1.23456789012e-9");
    }

    #[test]
    fn rejects_nan_and_ragged_rows() {
        let mut t = ResultTable::new("t", &[("a", Kind::Float), ("b", Kind::Int)]);
        t.push(vec![1.5.into(), 3usize.into()]).unwrap();
        assert!(t.push(vec![f64::NAN.into(), 1usize.into()]).is_err());
        assert!(t.push(vec![1.0.into()]).is_err());
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1.5,3\n");
    }
}

//! In-memory CSV tables and column type inference.

use std::collections::BTreeSet;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Categorical columns keep at most this many distinct values in their metadata.
pub const MAX_STORED_CATEGORIES: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("csv parse error: {0}")]
    Csv(String),
    #[error("dataset has no data rows")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub dtype: ColumnType,
    /// Number of distinct non-empty values observed.
    pub distinct_hint: usize,
    /// Sorted distinct values of a categorical column, empty when there are
    /// more than [`MAX_STORED_CATEGORIES`] or the column is numeric.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnMeta {
    pub fn is_numeric(&self) -> bool {
        self.dtype == ColumnType::Numeric
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Parses a header row plus data rows. Cells are trimmed; every row must
    /// have as many cells as the header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, TableError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> =
            rdr.headers().map_err(|e| TableError::Csv(e.to_string()))?.iter().map(str::to_string).collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(TableError::Csv("missing header row".into()));
        }
        let mut seen = BTreeSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(TableError::Csv(format!("duplicate column name {h:?}")));
            }
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| TableError::Csv(format!("row {}: {e}", i + 1)))?;
            if rec.len() != headers.len() {
                return Err(TableError::Csv(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    rec.len(),
                    headers.len()
                )));
            }
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(TableError::Empty);
        }
        Ok(Self { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Infers one [`ColumnMeta`] per column: numeric iff every non-empty cell
    /// parses as a finite real number.
    pub fn infer_schema(&self) -> Vec<ColumnMeta> {
        self.headers
            .iter()
            .enumerate()
            .map(|(c, name)| {
                let cells = self.rows.iter().map(|r| r[c].as_str()).filter(|s| !s.is_empty());
                let distinct: BTreeSet<&str> = cells.clone().collect();
                let numeric = !distinct.is_empty() && distinct.iter().all(|s| parse_number(s).is_some());
                let dtype = if numeric { ColumnType::Numeric } else { ColumnType::Categorical };
                let categories = if dtype == ColumnType::Categorical && distinct.len() <= MAX_STORED_CATEGORIES {
                    distinct.iter().map(|s| s.to_string()).collect()
                } else {
                    Vec::new()
                };
                ColumnMeta { name: name.clone(), dtype, distinct_hint: distinct.len(), categories }
            })
            .collect()
    }
}

pub fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

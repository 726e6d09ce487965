//! Exact cosine-similarity index over model and dataset profile embeddings.
//!
//! The catalog holds at most a few thousand entities, so retrieval is a linear
//! scan. Results are ordered by descending score with ties broken by ascending
//! id.
//!
//! On-disk format: one header line `PQAIDX1 <dimension> <count>` followed by
//! one JSON object per record.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Embedding;

pub const INDEX_MAGIC: &str = "PQAIDX1";

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("dimension mismatch: index has {expected}, record has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("index file format error: {0}")]
    Format(String),
    #[error("index io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Model,
    Dataset,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Model => "model",
            EntityKind::Dataset => "dataset",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    pub kind: EntityKind,
    pub embedding: Embedding,
    pub profile_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub id: String,
    pub kind: EntityKind,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dimension: usize,
    records: BTreeMap<(EntityKind, String), EntityRecord>,
}

impl VectorIndex {
    pub fn new(dimension: usize) -> Self {
        Self { dimension, records: BTreeMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, kind: EntityKind) -> usize {
        self.records.keys().filter(|(k, _)| *k == kind).count()
    }

    pub fn get(&self, id: &str, kind: EntityKind) -> Option<&EntityRecord> {
        self.records.get(&(kind, id.to_string()))
    }

    pub fn records(&self) -> impl Iterator<Item = &EntityRecord> {
        self.records.values()
    }

    /// Inserts or replaces the record with the same `(id, kind)`.
    pub fn upsert(&mut self, record: EntityRecord) -> Result<(), IndexError> {
        if record.embedding.dimension() != self.dimension {
            return Err(IndexError::DimensionMismatch {
                expected: self.dimension,
                actual: record.embedding.dimension(),
            });
        }
        self.records.insert((record.kind, record.id.clone()), record);
        Ok(())
    }

    pub fn remove(&mut self, id: &str, kind: EntityKind) -> bool {
        self.records.remove(&(kind, id.to_string())).is_some()
    }

    /// The `k` records of `kind` most similar to `query`.
    ///
    /// Queries of the wrong dimension match nothing.
    pub fn top_k(&self, query: &Embedding, kind: EntityKind, k: usize) -> Vec<RetrievalHit> {
        if k == 0 || query.dimension() != self.dimension {
            return Vec::new();
        }
        let q = query.values();
        let mut hits: Vec<RetrievalHit> = self
            .records
            .range((kind, String::new())..)
            .take_while(|((k, _), _)| *k == kind)
            .map(|(_, rec)| RetrievalHit { id: rec.id.clone(), kind, score: dot(q, rec.embedding.values()) })
            .collect();
        hits.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id)));
        hits.truncate(k);
        hits
    }

    /// Writes every record to `path`.
    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        self.save_filtered(path, None)
    }

    /// Writes only records of `kind` (or all when `None`). The file is written
    /// to a sibling temporary and renamed into place.
    pub fn save_filtered(&self, path: &Path, kind: Option<EntityKind>) -> Result<(), IndexError> {
        let selected: Vec<&EntityRecord> = self.records.values().filter(|r| kind.is_none_or(|k| r.kind == k)).collect();
        let mut buf = Vec::new();
        writeln!(buf, "{INDEX_MAGIC} {} {}", self.dimension, selected.len())?;
        for rec in selected {
            serde_json::to_writer(&mut buf, rec).map_err(|e| IndexError::Format(e.to_string()))?;
            buf.push(b'\n');
        }
        crate::fsutil::write_atomic(path, &buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let file = fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let header = lines.next().ok_or_else(|| IndexError::Format("missing header".into()))??;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(INDEX_MAGIC) {
            return Err(IndexError::Format(format!("bad magic in header {header:?}")));
        }
        let parse_num = |p: Option<&str>, what: &str| -> Result<usize, IndexError> {
            p.and_then(|s| s.parse().ok()).ok_or_else(|| IndexError::Format(format!("bad {what} in header {header:?}")))
        };
        let dimension = parse_num(parts.next(), "dimension")?;
        let count = parse_num(parts.next(), "count")?;
        if parts.next().is_some() {
            return Err(IndexError::Format("trailing header fields".into()));
        }
        let mut index = Self::new(dimension);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let rec: EntityRecord =
                serde_json::from_str(&line).map_err(|e| IndexError::Format(format!("record {i}: {e}")))?;
            index.upsert(rec)?;
        }
        if index.len() != count {
            return Err(IndexError::Format(format!("header declares {count} records, file holds {}", index.len())));
        }
        Ok(index)
    }

    /// Loads `path` into this index, replacing records with matching keys.
    pub fn merge_from(&mut self, other: VectorIndex) -> Result<(), IndexError> {
        if other.dimension != self.dimension {
            return Err(IndexError::DimensionMismatch { expected: self.dimension, actual: other.dimension });
        }
        self.records.extend(other.records);
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

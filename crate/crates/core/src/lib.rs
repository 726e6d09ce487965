//! Answers natural-language prediction queries over a catalog of tabular
//! datasets and trained models.
//!
//! A query is embedded and matched against model and dataset profiles. A
//! matched model is run on values read from the query; otherwise a new model
//! is trained on the matched dataset, profiled and added to the catalog.

pub mod catalog;
pub mod config;
pub mod embedding;
mod fsutil;
pub mod lm_provider;
pub mod ml_engine;
pub mod orchestrator;
pub mod preprocess;
pub mod table;
pub mod vector_index;

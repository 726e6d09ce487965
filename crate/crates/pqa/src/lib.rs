//! HTTP service and command-line front end for the prediction-query engine.

pub mod api;
pub mod settings;

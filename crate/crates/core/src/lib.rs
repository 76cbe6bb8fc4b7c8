//! Grid-based wildfire risk assessment.
//!
//! A region is discretized into square cells; heterogeneous predictor
//! sources are aggregated into per-cell (static) or per-cell-year (dynamic)
//! feature tables, classifiers are trained and compared under stratified
//! cross-validation, and counterfactual scenarios perturb inputs to a frozen
//! model.

pub mod cli;
pub mod config;
pub mod counterfactual;
pub mod error;
pub mod eval;
pub mod features;
pub mod geojson;
pub mod grid;
pub mod ingest;
pub mod models;
pub mod region;
pub mod sampling;
pub mod seed;
pub mod service;

pub use error::{Error, Result};

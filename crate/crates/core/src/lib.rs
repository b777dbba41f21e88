//! Social networks of physical proximity from Bluetooth discovery-scan logs.
//!
//! The pipeline runs `ingest` (logs, rosters, surveys, activity) into
//! `estimate` (detection grids and weighted networks), then `stats`
//! (contingency tables, Mantel tests, bootstrap intervals, resampling curves)
//! and `backbone` (disparity filter and density matching). `sim` generates
//! ground-truth co-location with matching app and badge logs.

pub mod backbone;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod export;
pub mod ingest;
pub mod model;
pub mod sim;
pub mod stats;

pub use error::{Error, ErrorClass, Result};

//! Harness library behind the `memnet` binary: config resolution, dataset
//! ingestion, network persistence, and experiment orchestration.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod netfile;

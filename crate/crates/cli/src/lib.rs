//! Front end for the `mfb` binary: CSV ingestion, the test battery, report
//! rendering and simulation configs.

pub mod app;
pub mod battery;
pub mod config;
pub mod ingest;
pub mod render;

//! Command-line front end for `lspacf`.
//!
//! Commands read and write plain CSV (curves, series), JSON (test results,
//! tuning records, benchmark reports) and standalone SVG plots. Every output
//! file gets a `<file>.run.json` sidecar holding the resolved [`RunConfig`].

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod ingest;
pub mod output;
pub mod svg;

pub use bench::{run_scenario, BenchReport, Scenario};
pub use error::{CliError, Result};
pub use ingest::ingest_csv;
pub use output::RunConfig;

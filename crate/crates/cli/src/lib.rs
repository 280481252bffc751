//! Experiment harness: CSV ingestion, configuration, repeated structure
//! learning runs and report files.

pub mod config;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod netfile;
pub mod report;

pub use config::{ExperimentConfig, ModelKind, Source};
pub use error::{CliError, Result};
pub use experiment::{evaluate_structure, repeat_seeds, run_experiment, Evaluation, RunRecord, RunReport};
pub use ingest::{load_csv, write_csv};
pub use netfile::{NetworkFile, NodeParams};
pub use report::{render_csv, render_summary, summary, write_report, HEADER};

//! Experiment runner: manifests, run directories and report bundles.

pub mod error;
pub mod manifest;
pub mod report;
pub mod run;

pub use error::{CliError, CliResult, EXIT_INVALID_MANIFEST, EXIT_IO, EXIT_OK, EXIT_PARTIAL_FAILURE};
pub use manifest::{arbiter_control, ExperimentManifest, Overrides, Scale, DEFAULT_MANIFEST};
pub use report::{build_report, report, run_all, Report, ReportFormat};
pub use run::{attack, generate, quality, RunDir};

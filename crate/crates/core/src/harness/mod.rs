//! Convergence studies: JSON configs, grid runs, CSV rows, fits and reports.

pub mod config;
pub mod extrapolate;
pub mod report;
pub mod rows;
pub mod study;
pub mod verify;

pub use config::{CheckKind, DistributionConfig, StudyConfig, StudyKind, Threshold};
pub use extrapolate::{extrapolate_rate, Extrapolation};
pub use report::{emit_report, Report};
pub use rows::{format_value, sort_rows, write_csv, RowStatus, StudyRow, CSV_HEADER};
pub use study::{run_study, Reference, StudyOutcome};
pub use verify::{run_checks, run_verify_suite, CheckResult};

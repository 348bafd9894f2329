//! Experiment harness around the sets-clustering library: dataset loading
//! and synthesis, configured experiment runs, and CSV/JSON reporting.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::{DatasetSpec, ExperimentConfig, LossSpec, Mode, ReportFormat};
pub use data::{gen_two_circles, load_grouped_csv, write_grouped_csv};
pub use error::{HarnessError, Result};
pub use experiment::{
    enumeration_budget, load_dataset, run_experiment, run_experiment_i, run_experiment_ii,
    run_single_solve, write_report_files, ExperimentOutcome,
};
pub use report::{
    approximation_error, centers_path, emit_centers, emit_report, load_report, sort_rows,
    CentersRecord, ReportRow,
};

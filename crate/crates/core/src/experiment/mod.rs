//! Run configurations, the scan driver that writes reports and manifests,
//! and plot-ready spectrum tables.

mod config;
mod run;
mod table;

pub use config::{default_coefficients, default_gamma, parse_config, serialize_config, Check, RunConfig};
pub use run::{
    evaluate_checks, exit_code_for, load_config, manifest_text, report_file_name, run_experiment, worker_count,
    CheckResult, ExperimentOutcome, RunFailure, DRIFT_TOL, EXIT_BUDGET, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION,
    FIT_RESIDUAL_TOL, GAMMA_SLACK, HIGH_FRACTION_TOL, THREADS_ENV,
};
pub use table::emit_spectrum_table;

//! Seeded Monte Carlo drivers, their output files and run manifests.

mod config;
mod drivers;
mod output;
mod verify;

pub use config::{ExperimentConfig, OutputFormat};
pub use drivers::{
    run_beta_sweep, run_scatter, run_winner_histograms, Comparison, HistogramRun, HistogramSummary,
    ScatterRow, ScatterRun, ScatterSummary, SweepRow, SweepRun, SweepSummary, WinnerSample,
    DENSITY_OVERLAY_POINTS,
};
pub use output::{
    fmt_float, manifest_path_for, write_atomic, write_csv, CsvRecord, RunManifest,
};
pub use verify::{run_verify, CheckResult, Fault, Scale, VerifyOptions, VerifyReport};

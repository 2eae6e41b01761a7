//! Config-driven experiment runner behind the `specfill` binary.

mod config;
mod runner;

pub use config::{
    ConfigFile, ExperimentConfig, FillingChoice, Mode, Overrides, DEFAULT_INDEX_BUDGET,
    DEFAULT_K_MAX, DEFAULT_MARGIN_TRIALS, DEFAULT_N_LIST, DEFAULT_P, DEFAULT_SEED, DEFAULT_TRIALS,
};
pub use runner::{
    default_workers, exit_code, margin_checks, run, write_semicircle_curve, Aggregate, Outcome,
    EXIT_CHECKS_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, MARGIN_Z, WORKERS_ENV,
};

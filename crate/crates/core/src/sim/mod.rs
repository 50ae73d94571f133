//! Simulation study: data-generating settings and the rejection-rate harness.

mod harness;
mod settings;

pub use harness::{
    run_grid, run_grid_with_progress, run_replication, write_csv, CaseResult, HarnessConfig,
    ReplicationOutcome,
};
pub use settings::{
    classify_scenario, generate_dataset, Case, CensoringLaw, CensoringSampler, Scenario, Setting,
    UncuredLaw, TAU_QUANTILE_LEVELS, TAU_REFERENCE_QUANTILE,
};

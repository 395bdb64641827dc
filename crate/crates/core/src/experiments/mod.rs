//! Objective families and seeded batch experiments.

pub mod families;
pub mod output;
pub mod runs;

pub use families::{generate_family, mixed_regime, FamilySpec};
pub use output::{canonical_json, format_f64, write_runs_csv, RunRow, SCHEMA_VERSION};
pub use runs::{
    estimate_nu, experiment_params, instance_seed, lower_bound_experiment, lower_bound_min_size, run_seed,
    scaling_experiment, tail_experiment, CellResult, LowerBoundResult, NuEstimate, NuSource, Plateau, ScalingResult,
    Summary, TailResult, TailRow, MAX_TRUNCATION_RATE, PLATEAU_TOLERANCE,
};

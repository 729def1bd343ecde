//! Twin-experiment orchestration: configuration, truth, runs and comparisons.

mod compare;
mod config;
mod run;
mod truth;

pub use compare::{compare_runs, Comparison, Summary, WindowMean};
pub use config::{parse_pairs, Case, ExperimentConfig, RUN_KEY_PREFIX};
pub use run::{
    build_initial_ensemble, free_ensemble_moments, manifest_checksums, observation_operator,
    run_experiment, run_in_memory, synthesize, verify_manifest, write_artifacts, write_manifest,
    write_moments, ExperimentOutcome, MomentSnapshot, RunArtifacts, CODE_VERSION,
};
pub use truth::{experiment_grid, generate_truth, initial_depth, solver_config, TruthRun, TruthSource};

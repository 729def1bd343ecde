//! Ensemble filtering: moments, weights, the ETKF transform and full filter runs.

mod cluster;
mod ensemble;
mod etkf;
mod filter;
mod weight;

pub use cluster::{cluster_partition, detect_discontinuity, mask_correlations, ClusterPartition, Region};
pub use ensemble::{
    correlation_matrix, correlation_matrix_factor, ensemble_moments, gradient_second_moment,
    member_gradient_second_moment, sample_variance_diag, Ensemble, EPS_VAR,
};
pub use etkf::{analysis_mean, etkf_transform, Transform};
pub use filter::{
    analysis_step, forecast, run_algorithm1, run_algorithm2, run_filter, AnalysisRecord, Dynamics,
    FilterConfig, FilterRun, Trajectory, Variant,
};
pub use weight::{
    build_weight, localize, localized_covariance, WeightForm, WeightMatrix, WeightSpec, WEIGHT_FLOOR,
};

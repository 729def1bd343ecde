//! Ensemble transform Kalman filtering for states with shocks.
//!
//! The crate contains a WENO5/TVD-RK3 shallow-water solver, the analytic
//! dam-break solution used as ground truth, the ensemble filters (standard
//! ETKF with inflation and localization, and the gradient-second-moment
//! weighted variant with optional clustering), error metrics, and the
//! experiment harness behind the `shockfilter` command-line tool.

pub mod assim;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod observe;
pub mod pde;
pub mod rng;
pub mod scalar;
pub mod stoker;

pub use error::{Error, Result};
pub use grid::Grid1D;
pub use scalar::Real;

/// Double-precision aliases used by the harness.
pub type Ensemble64 = assim::Ensemble<f64>;
pub type FilterConfig64 = assim::FilterConfig<f64>;
pub type WeightMatrix64 = assim::WeightMatrix<f64>;
pub type Grid64 = Grid1D<f64>;
pub type SWEState64 = pde::SWEState<f64>;
pub type TransportModel64 = pde::TransportModel<f64>;
pub type StokerSolution64 = stoker::StokerSolution<f64>;
pub type Matrix64 = linalg::Matrix<f64>;

/// Single-precision aliases.
pub type Ensemble32 = assim::Ensemble<f32>;
pub type FilterConfig32 = assim::FilterConfig<f32>;
pub type WeightMatrix32 = assim::WeightMatrix<f32>;
pub type Grid32 = Grid1D<f32>;
pub type SWEState32 = pde::SWEState<f32>;
pub type TransportModel32 = pde::TransportModel<f32>;
pub type StokerSolution32 = stoker::StokerSolution<f32>;
pub type Matrix32 = linalg::Matrix<f32>;

//! Uniform-grid hyperbolic solvers: WENO5 in space, TVD-RK3 in time.

mod rk3;
mod swe;
mod transport;
mod weno;

pub use rk3::tvdrk3_step;
pub use swe::{
    integrate_coupled_swe, solve_coupled_swe, swe_rhs, swe_step, SWEState, SolverConfig,
    TransportSpeed, VelocityField, GRAVITY,
};
pub use transport::{transport_step, TransportModel};
pub use weno::{flux_difference, weno5_derivative, Boundary, GHOST, WENO_EPSILON};

/// Total variation `sum |v_{i+1} - v_i|`.
pub fn total_variation<T: crate::Real>(v: &[T]) -> T {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

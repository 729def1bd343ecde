//! Seeded Gaussian draws.
//!
//! Every random stream is a ChaCha8 generator seeded from the run seed, with a
//! fixed stream id per purpose so the initial ensemble and the observation noise
//! never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

pub const ENSEMBLE_STREAM: u64 = 0;
pub const OBSERVATION_STREAM: u64 = 1;

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from `N(0, std^2)`.
pub fn gaussian<T: Real>(rng: &mut ChaCha8Rng, std: T) -> T {
    let z: f64 = StandardNormal.sample(rng);
    std * T::lit(z)
}

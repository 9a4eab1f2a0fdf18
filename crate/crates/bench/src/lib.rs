//! Shared fixtures for the benchmarks.

use aeq_core::transforms::sample_poisson_process;
use aeq_core::{count_pyramid, make_density, CountPyramid, DensityModel, DensitySpec, FamilySpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `f(x) = 1/2 + x`.
pub fn linear_density() -> DensityModel {
    make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5))
        .expect("valid density")
}

/// Count pyramid of a seeded Poisson-process sample with intensity `n f`.
pub fn pyramid(n: u64, k0: u32, k1: u32, seed: u64) -> CountPyramid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = sample_poisson_process(&linear_density(), n, &mut rng).expect("sample");
    count_pyramid(&sample, k0, k1).expect("pyramid")
}

//! Maps between the Poisson-process and white-noise experiments, plus the
//! sampling and sample-size randomizations that connect density estimation.

mod maps;
mod path;
mod pyramid;
mod sampling;

pub use maps::{forward_map, inverse_map, sigma, CoefficientStack, MapDiagnostics, Mapper};
pub use path::{
    analyze_path, reconstruct_path, simulate_white_noise, simulate_white_noise_from_means,
    WhiteNoisePath,
};
pub use pyramid::{count_pyramid, pyramid_to_points, CountPyramid, MAX_PYRAMID_LEVEL};
pub use sampling::{
    choose_k0, floored_histogram, histogram_estimate, randomize_to_fixed, randomize_to_poisson,
    sample_fixed, sample_poisson_process,
};

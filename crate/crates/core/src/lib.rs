//! Constructive equivalence mappings between the Poisson process, density
//! estimation and Gaussian white-noise-with-drift experiments on `[0, 1]`.
//!
//! The crate is organised bottom-up:
//!
//! * [`dyadic`]: dyadic cells, the Haar basis, piecewise averages and Besov
//!   norms of Haar coefficients.
//! * [`density`]: density models with exact dyadic cell integrals, derived
//!   cell quantities and inverse-CDF sampling.
//! * [`couplings`]: the root transform, the dithered symmetric binomial CDF
//!   `F_m`, normal CDF/quantile and the exact densities of the coupled
//!   scalar variables.
//! * [`transforms`]: count pyramids, the forward map `T_n`, its deterministic
//!   inverse, white-noise simulation and the fixed/Poisson sample-size
//!   randomizations.
//! * [`metrics`]: Hellinger numerics and the verification harness for the
//!   local limit theorems, the Tusnády boundary check and the supporting
//!   lemmas.

pub mod couplings;
pub mod density;
pub mod dyadic;
pub mod error;
pub mod metrics;
pub mod quad;
pub mod rng;
pub mod special;
pub mod transforms;

#[cfg(test)]
mod properties;

pub use couplings::{
    binomial_coupled_density, fm_cdf, fm_quantile, normal_cdf, normal_quantile,
    poisson_root_density, root_transform, root_transform_inverse, tusnady_boundaries,
    CouplingDensity, CouplingKind, FmTable, Gaussian, PiecewiseDensity, TusnadyBoundaryTable,
};
pub use density::{
    make_density, DensityModel, DensitySpec, FamilySpec, FixedSample, PointProcessSample,
};
pub use dyadic::{
    besov_norm, besov_tail_norm, haar_coefficient, piecewise_average, DyadicIndex,
    HaarCoefficientTable, StepFunction,
};
pub use error::{Error, Result};
pub use metrics::{BoundReport, PinnedConstants};
pub use rng::{DitherStream, Purpose};
pub use transforms::{
    analyze_path, choose_k0, count_pyramid, forward_map, inverse_map, reconstruct_path,
    CoefficientStack, CountPyramid, MapDiagnostics, WhiteNoisePath,
};

//! Hellinger numerics and the verification harness: scalar limit theorem
//! sweeps, the coupling boundary check, the three-term bound with its
//! numerical counterpart, cell-wise lemmas and histogram rates.

mod constants;
mod hellinger;
mod lemmas;
mod rates;
mod report;
mod sweeps;
mod thm3;

pub use constants::{PilotGrids, PinnedConstants, CONSTANTS_VERSION};
pub use hellinger::{
    gaussian_hellinger_sq, gaussian_pair_hellinger_sq, hellinger_sq, product_hellinger_sq,
    GaussianHellinger, SEGMENT_TOLERANCE, SUPPORT_TAIL,
};
pub use lemmas::{
    drift_gap_check, fourth_moment_check, haar_sum_check, jensen_gap_check, lemma_checks,
    poisson_root_fourth_moment, sqrt_haar_check, MAX_LEMMA_LEVEL,
};
pub use rates::{rate_check, SampleScheme};
pub use report::{format_number, BoundReport, Check};
pub use sweeps::{
    binomial_distance, quantile_shift_check, scaled_poisson_distance, thm4_sweep, thm5_centre,
    thm5_sweep, tusnady_check, Thm5Pins, PIN_TOLERANCE, THM4_OFFSET, THM4_REFERENCE,
};
pub use thm3::{
    decomposition_estimate, haar_sums, thm3_bound, CellRecord, Decomposition, DecompositionRow,
    HaarSums, LevelTerm, Thm3Bound, Thm3Constants,
};

//! Empirically pinned values of the universal constants.
//!
//! The inequalities checked by this crate hold for some finite constants
//! whose values are not known in closed form. [`PinnedConstants::pilot`]
//! evaluates each one as a supremum over a fixed grid; the result is stored
//! in `constants/pinned.json` and shipped with the crate, and regression
//! tests require a fresh pilot run to reproduce it to `1e-8`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::sweeps::{quantile_shift_check, thm4_sweep, thm5_sweep, tusnady_check};
use crate::metrics::thm3::Thm3Constants;

const PINNED_JSON: &str = include_str!("../../constants/pinned.json");

/// Grids over which the pilot run takes its suprema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotGrids {
    pub thm4_lambdas: Vec<f64>,
    pub thm5_ms: Vec<u64>,
    pub thm5_ps: Vec<f64>,
    pub boundary_ms: Vec<u64>,
}

impl Default for PilotGrids {
    fn default() -> Self {
        Self {
            thm4_lambdas: (-4..=14).map(|e| (e as f64).exp2()).collect(),
            thm5_ms: std::iter::once(0).chain((0..=10).map(|e| 1u64 << e)).collect(),
            thm5_ps: vec![0.4, 0.45, 0.49, 0.5, 0.51, 0.55, 0.6],
            boundary_ms: vec![64, 256, 1024],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedConstants {
    pub version: u32,
    /// `sup lambda H^2(g_lambda, phi_{2 sqrt(lambda)})`.
    pub c: f64,
    /// `sup (H^2(g_{m,p}, phi_b) - shift^2 / 2) / ((p - 1/2)^2 + m (p - 1/2)^4)`.
    pub d: f64,
    /// `3 D / 8 + 2`.
    pub d1: f64,
    /// `D / 9 + 8 / 3`.
    pub d2: f64,
    /// Boundary constant: `sup |z_j - u_j| m / (|u_j|^3 + log m)`.
    pub c0: f64,
    /// `sup H^2(g_{m,p}, phi_b) / (b^2 / m + b^8 / m^2)`.
    pub c1: f64,
    /// `sup |z - z'| / (m^{-1/2} + |z|^3 / m)` at piece midpoints.
    pub c2: f64,
    pub grids: PilotGrids,
}

pub const CONSTANTS_VERSION: u32 = 1;

impl PinnedConstants {
    /// The constants shipped with the crate.
    pub fn load() -> Result<Self> {
        Self::from_json(PINNED_JSON)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("pinned constants: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// Recomputes every constant over the default grids.
    pub fn pilot() -> Result<Self> {
        Self::pilot_with(PilotGrids::default())
    }

    pub fn pilot_with(grids: PilotGrids) -> Result<Self> {
        let thm4 = thm4_sweep(&grids.thm4_lambdas, false, None)?;
        let c = thm4.lhs.iter().copied().fold(0.0, f64::max);
        let thm5 = thm5_sweep(&grids.thm5_ms, &grids.thm5_ps, None)?;
        let d = thm5.column("d_ratio").expect("d_ratio column").into_iter().fold(0.0, f64::max);
        let c0 = tusnady_check(&grids.boundary_ms, None)?.ratio_sup;
        let c2 = quantile_shift_check(&grids.boundary_ms, None)?.ratio_sup;
        Ok(Self {
            version: CONSTANTS_VERSION,
            c,
            d,
            d1: 3.0 * d / 8.0 + 2.0,
            d2: d / 9.0 + 8.0 / 3.0,
            c0,
            c1: thm5.ratio_sup,
            c2,
            grids,
        })
    }

    pub fn thm3(&self) -> Thm3Constants {
        Thm3Constants { c: self.c, d1: self.d1, d2: self.d2 }
    }

    /// Largest relative difference between matching constants.
    pub fn max_relative_difference(&self, other: &Self) -> f64 {
        let pairs = [
            (self.c, other.c),
            (self.d, other.d),
            (self.d1, other.d1),
            (self.d2, other.d2),
            (self.c0, other.c0),
            (self.c1, other.c1),
            (self.c2, other.c2),
        ];
        pairs
            .iter()
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

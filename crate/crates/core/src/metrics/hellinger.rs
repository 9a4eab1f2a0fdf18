//! Squared Hellinger distances between one-dimensional densities.

use serde::{Deserialize, Serialize};

use crate::couplings::PiecewiseDensity;
use crate::error::Result;
use crate::quad::{integrate, Tolerance};

/// Mass each density may leave outside the integration range.
pub const SUPPORT_TAIL: f64 = 1e-20;

/// Per-segment tolerance: relative `1e-10`, with an absolute floor far
/// below any distance of interest so tiny segments do not stall.
pub const SEGMENT_TOLERANCE: Tolerance = Tolerance::new(1e-18, 1e-10);

/// `H^2 = int (sqrt(g1) - sqrt(g2))^2`, integrated directly rather than as
/// `2 - 2 * affinity` so that small distances keep full relative accuracy.
///
/// The range is the union of both supports at [`SUPPORT_TAIL`], split at
/// every knot of either density. The neglected tails contribute at most
/// `2 * SUPPORT_TAIL`.
pub fn hellinger_sq<A, B>(d1: &A, d2: &B) -> Result<f64>
where
    A: PiecewiseDensity + ?Sized,
    B: PiecewiseDensity + ?Sized,
{
    let (a1, b1) = d1.support(SUPPORT_TAIL);
    let (a2, b2) = d2.support(SUPPORT_TAIL);
    let (a, b) = (a1.min(a2), b1.max(b2));
    let mut points = vec![a];
    points.extend(d1.knots_in(a, b));
    points.extend(d2.knots_in(a, b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let integrand = |x: f64| {
        let d = d1.pdf(x).sqrt() - d2.pdf(x).sqrt();
        d * d
    };
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(integrand, w[0], w[1], SEGMENT_TOLERANCE)?.value;
    }
    Ok(total.clamp(0.0, 2.0))
}

/// Exact squared Hellinger distance between `N(m1, s1^2)` and `N(m2, s2^2)`.
pub fn gaussian_pair_hellinger_sq(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let v = s1 * s1 + s2 * s2;
    let shape = 0.5 * (2.0 * s1 * s2 / v).ln();
    let d = m1 - m2;
    (-2.0 * (shape - d * d / (4.0 * v)).exp_m1()).clamp(0.0, 2.0)
}

/// Exact value and the quadratic upper bound for two unit-variance normals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianHellinger {
    /// `2 (1 - exp(-(mu1 - mu2)^2 / 8))`.
    pub exact: f64,
    /// `(mu1 - mu2)^2 / 4`.
    pub bound: f64,
}

pub fn gaussian_hellinger_sq(mu1: f64, mu2: f64) -> GaussianHellinger {
    let d = mu1 - mu2;
    GaussianHellinger { exact: -2.0 * (-d * d / 8.0).exp_m1(), bound: d * d / 4.0 }
}

/// Joint distance of independent coordinates: `2 - 2 prod(1 - H_i^2 / 2)`.
pub fn product_hellinger_sq(parts: &[f64]) -> f64 {
    let log_affinity: f64 = parts.iter().map(|h| (-0.5 * h).ln_1p()).sum();
    (-2.0 * log_affinity.exp_m1()).clamp(0.0, 2.0)
}

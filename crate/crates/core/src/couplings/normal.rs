//! Standard normal CDF and quantile.

use serde::{Deserialize, Serialize};
use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Smallest probability the quantile accepts before saturating.
pub const QUANTILE_FLOOR: f64 = 1e-300;
/// Largest probability the quantile accepts before saturating.
pub const QUANTILE_CEIL: f64 = 1.0 - 1e-16;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_639_861_397_473_637_783_412_817;

/// `Phi(z)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Mills ratio `Phi(-x) / phi(x)` for large positive `x`, by continued fraction.
fn mills_ratio(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=60).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// `ln Phi(z)`, accurate far into the lower tail where `Phi(z)` underflows.
pub fn ln_normal_cdf(z: f64) -> f64 {
    if z < -20.0 {
        -0.5 * z * z - LN_SQRT_2PI + mills_ratio(-z).ln()
    } else if z > 5.0 {
        (-normal_cdf(-z)).ln_1p()
    } else {
        normal_cdf(z).ln()
    }
}

/// Result of a quantile evaluation; `saturated` is set when the probability
/// had to be clamped into `[QUANTILE_FLOOR, QUANTILE_CEIL]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub value: f64,
    pub saturated: bool,
}

const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

/// Rational approximation in the lower tail, parameterized by `q = sqrt(-2 ln u)`.
fn tail_guess(q: f64) -> f64 {
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

/// Quantile for `u` in `(0, 1/2]`, with one Halley refinement.
fn lower_quantile(u: f64) -> f64 {
    let x = if u < P_LOW {
        tail_guess((-2.0 * u.ln()).sqrt())
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - u;
    if e == 0.0 {
        return x;
    }
    let t = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - t / (1.0 + 0.5 * x * t)
}

/// `Phi^{-1}(u)`. Probabilities outside `[QUANTILE_FLOOR, QUANTILE_CEIL]`
/// are clamped and flagged.
pub fn normal_quantile(u: f64) -> Quantile {
    if u.is_nan() {
        return Quantile { value: f64::NAN, saturated: true };
    }
    let saturated = !(QUANTILE_FLOOR..=QUANTILE_CEIL).contains(&u);
    let u = u.clamp(QUANTILE_FLOOR, QUANTILE_CEIL);
    let value = if u <= 0.5 { lower_quantile(u) } else { -lower_quantile(1.0 - u) };
    Quantile { value, saturated }
}

/// `Phi^{-1}(exp(ln_u))` for `ln_u <= ln(1/2)`, valid far beyond the
/// range where `exp(ln_u)` is representable.
pub fn normal_quantile_ln(ln_u: f64) -> f64 {
    if ln_u == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if ln_u > -600.0 {
        return normal_quantile(ln_u.exp()).value;
    }
    let mut x = tail_guess((-2.0 * ln_u).sqrt());
    for _ in 0..50 {
        let step = (ln_normal_cdf(x) - ln_u) * mills_ratio(-x);
        x -= step;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    x
}

//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Every integrand in this crate is smooth between known breakpoints, so the
//! callers split the domain at those points and hand each smooth segment to
//! [`integrate`].
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule: a result is accepted once the summed error estimate is
/// below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_segments: 2000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-300, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kron += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` (with `a <= b`).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut segments = vec![kronrod(&f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature { a, b, error });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Integral { value, error });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        if segments.len() >= tol.max_segments || mid <= seg.a || mid >= seg.b {
            // Accept a result whose remaining error is dominated by round-off.
            if error <= 1e3 * f64::EPSILON * value.abs().max(tol.abs) {
                return Ok(Integral { value, error });
            }
            return Err(Error::Quadrature { a, b, error });
        }
        segments[worst] = kronrod(&f, seg.a, mid);
        segments.push(kronrod(&f, mid, seg.b));
    }
}

/// Integrates over consecutive segments of an ascending list of points.
pub fn integrate_segments<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<f64> {
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(&f, w[0], w[1], tol)?.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (20.0 * x).sin().powi(2), 0.0, PI, Tolerance::new(0.0, 1e-12)).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singular_derivative() {
        let r = integrate(f64::sqrt, 0.0, 1.0, Tolerance::new(0.0, 1e-11)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn zero_width_and_bad_bounds() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, Tolerance::default()).unwrap().value, 0.0);
        assert!(integrate(|x| x, 1.0, 0.0, Tolerance::default()).is_err());
    }

    #[test]
    fn segments_add_up() {
        let v = integrate_segments(|x| x.abs(), &[-1.0, 0.0, 2.0], Tolerance::default()).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }
}

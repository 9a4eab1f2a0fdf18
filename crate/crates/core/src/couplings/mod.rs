//! Scalar coupling machinery: the variance-stabilizing root transform, the
//! dithered binomial CDF `F_m`, normal CDF/quantile, and the exact densities
//! of the transformed variables.

mod binomial;
mod density;
mod normal;
mod tusnady;

pub use binomial::{fm_cdf, fm_quantile, FmCache, FmTable};
pub use density::{
    binomial_coupled_density, binomial_coupled_with, poisson_root_density, CouplingDensity,
    CouplingKind, Gaussian, PiecewiseDensity,
};
pub use normal::{
    ln_normal_cdf, normal_cdf, normal_quantile, normal_quantile_ln, Quantile, QUANTILE_CEIL,
    QUANTILE_FLOOR,
};
pub use tusnady::{tusnady_boundaries, BoundaryRow, TusnadyBoundaryTable};

pub(crate) use tusnady::boundaries_from;

/// `t(x) = 2 sgn(x) sqrt(|x|)`, with `t(0) = 0`.
#[inline]
pub fn root_transform(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        2.0 * x.signum() * x.abs().sqrt()
    }
}

/// `t^{-1}(y) = sgn(y) y^2 / 4`.
#[inline]
pub fn root_transform_inverse(y: f64) -> f64 {
    0.25 * y * y.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_transform_examples() {
        assert_eq!(root_transform(1.0), 2.0);
        assert_eq!(root_transform_inverse(2.0), 1.0);
        assert_eq!(root_transform(-0.25), -1.0);
        assert_eq!(root_transform(0.0), 0.0);
        assert_eq!(root_transform(-0.0), 0.0);
        assert_eq!(root_transform_inverse(-2.0), -1.0);
    }

    #[test]
    fn root_transform_round_trip() {
        for i in -200..=200 {
            let x = i as f64 * 0.37;
            let back = root_transform_inverse(root_transform(x));
            assert!((back - x).abs() <= 4.0 * f64::EPSILON * x.abs());
            let y = i as f64 * 0.11;
            assert!((root_transform(root_transform_inverse(y)) - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
    }
}

//! Discretized white-noise paths and their Haar analysis.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::transforms::maps::{sigma, CoefficientStack};
use crate::transforms::pyramid::check_levels;

/// A white-noise path `dY = sqrt(f) dt + dW / (2 sqrt(n))` observed through
/// its normalized increments `2^{k1} (Y(b) - Y(a))` over the finest cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoisePath {
    pub n: u64,
    pub k1: u32,
    pub averages: Vec<f64>,
}

impl WhiteNoisePath {
    /// `Y` at the grid points `l / 2^{k1}`, starting from `Y(0) = 0`.
    pub fn values(&self) -> Vec<f64> {
        let w = (-(self.k1 as f64)).exp2();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.averages.len() + 1);
        out.push(0.0);
        for a in &self.averages {
            acc += a * w;
            out.push(acc);
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.averages.len() != 1usize << self.k1 {
            return Err(Error::InvalidInput("white-noise path has inconsistent shape".into()));
        }
        Ok(())
    }
}

/// Synthesizes the finest-level path from a stack: each parent average `a`
/// splits into `a + W` and `a - W`.
pub fn reconstruct_path(stack: &CoefficientStack) -> Result<WhiteNoisePath> {
    stack.validate()?;
    let mut current = stack.base.clone();
    for detail in &stack.details {
        current = current
            .iter()
            .zip(detail)
            .flat_map(|(&a, &w)| [a + w, a - w])
            .collect();
    }
    Ok(WhiteNoisePath { n: stack.n, k1: stack.k1, averages: current })
}

/// Haar analysis of a path down to level `k0`.
pub fn analyze_path(path: &WhiteNoisePath, k0: u32) -> Result<CoefficientStack> {
    path.validate()?;
    check_levels(k0, path.k1)?;
    let mut current = path.averages.clone();
    let mut details = Vec::with_capacity((path.k1 - k0) as usize);
    for _ in k0..path.k1 {
        let (parents, diffs): (Vec<f64>, Vec<f64>) = current
            .chunks_exact(2)
            .map(|c| (0.5 * (c[0] + c[1]), 0.5 * (c[0] - c[1])))
            .unzip();
        details.push(diffs);
        current = parents;
    }
    details.reverse();
    Ok(CoefficientStack {
        n: path.n,
        k0,
        k1: path.k1,
        base: current,
        details,
        sigma: (k0..=path.k1).map(|k| sigma(k, path.n)).collect(),
    })
}

/// Simulates a path with drift given by finest-level cell means of `sqrt(f)`.
pub fn simulate_white_noise_from_means<R: Rng + ?Sized>(
    sqrt_means: &[f64],
    n: u64,
    rng: &mut R,
) -> Result<WhiteNoisePath> {
    if n == 0 || !sqrt_means.len().is_power_of_two() {
        return Err(Error::InvalidInput("need n >= 1 and 2^k1 drift values".into()));
    }
    let k1 = sqrt_means.len().trailing_zeros();
    let s = sigma(k1, n);
    let averages = sqrt_means
        .iter()
        .map(|&h| h + s * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(WhiteNoisePath { n, k1, averages })
}

/// Simulates `dY = sqrt(f) dt + dW / (2 sqrt(n))` on the level-`k1` grid.
pub fn simulate_white_noise<R: Rng + ?Sized>(
    f: &DensityModel,
    n: u64,
    k1: u32,
    rng: &mut R,
) -> Result<WhiteNoisePath> {
    check_levels(0, k1)?;
    simulate_white_noise_from_means(&f.level_sqrt_means(k1)?, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_density, DensitySpec, FamilySpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn analysis_inverts_synthesis() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let averages: Vec<f64> = (0..256).map(|_| rng.random::<f64>() - 0.3).collect();
        let path = WhiteNoisePath { n: 100, k1: 8, averages };
        let stack = analyze_path(&path, 2).unwrap();
        let back = reconstruct_path(&stack).unwrap();
        for (a, b) in back.averages.iter().zip(&path.averages) {
            assert!((a - b).abs() <= 1e-15);
        }
        let again = analyze_path(&back, 2).unwrap();
        for (a, b) in again.details.iter().flatten().zip(stack.details.iter().flatten()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn path_values_accumulate() {
        let path = WhiteNoisePath { n: 1, k1: 1, averages: vec![1.0, 3.0] };
        assert_eq!(path.values(), vec![0.0, 0.5, 2.0]);
    }

    #[test]
    fn simulated_noise_has_the_right_scale() {
        let f = make_density(&DensitySpec::new(FamilySpec::Uniform, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let path = simulate_white_noise(&f, 64, 10, &mut rng).unwrap();
        let s2 = sigma(10, 64).powi(2);
        let mean = path.averages.iter().sum::<f64>() / 1024.0;
        let var = path.averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 1023.0;
        assert!((mean - 1.0).abs() < 4.0 * (s2 / 1024.0).sqrt());
        assert!((var / s2 - 1.0).abs() < 0.15);
    }
}

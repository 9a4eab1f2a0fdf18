//! The three-term Hellinger bound for the Poisson-to-white-noise map and a
//! numerical estimate of the distance it bounds.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::couplings::{poisson_root_density, FmCache, Gaussian};
use crate::density::DensityModel;
use crate::dyadic::{level_power_sum, DyadicIndex};
use crate::error::{Error, Result};
use crate::metrics::hellinger::{hellinger_sq, product_hellinger_sq};
use crate::metrics::sweeps::binomial_distance;
use crate::rng::{stream, Purpose};
use crate::transforms::{analyze_path, sigma, simulate_white_noise_from_means, CountPyramid, Mapper};

/// Multipliers of the three terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm3Constants {
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Thm3Constants {
    pub const UNIT: Self = Self { c: 1.0, d1: 1.0, d2: 1.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm3Bound {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub total: f64,
}

/// Haar sums entering the bound: `sum_k 2^k sum_l theta^2` and
/// `sum_k 2^{3k} sum_l theta^4` over `k0 <= k <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarSums {
    pub square: f64,
    pub fourth: f64,
}

pub fn haar_sums(f: &DensityModel, k0: u32, k_max: u32) -> Result<HaarSums> {
    if k_max < k0 {
        return Err(Error::InvalidInput(format!("k_max {k_max} < k0 {k0}")));
    }
    let mut sums = HaarSums { square: 0.0, fourth: 0.0 };
    for k in (k0..=k_max).rev() {
        let scale = (k as f64).exp2();
        sums.square += scale * level_power_sum(f, k, 2.0);
        sums.fourth += scale.powi(3) * level_power_sum(f, k, 4.0);
    }
    Ok(sums)
}

/// `(C / eps0)(4^{k0} / n) + (D1 / eps0^2) S2 + (D2 / eps0^3)(n / 4^{k0}) S4`.
pub fn thm3_bound(
    f: &DensityModel,
    n: u64,
    k0: u32,
    k_max: u32,
    constants: Thm3Constants,
) -> Result<Thm3Bound> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let sums = haar_sums(f, k0, k_max)?;
    let eps = f.eps0();
    let ratio = (2.0 * k0 as f64).exp2() / n as f64;
    let term1 = constants.c / eps * ratio;
    let term2 = constants.d1 / (eps * eps) * sums.square;
    let term3 = constants.d2 / eps.powi(3) / ratio * sums.fourth;
    Ok(Thm3Bound { term1, term2, term3, total: term1 + term2 + term3 })
}

/// Per-cell record of a detail level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub m: u64,
    pub p: f64,
    /// `sqrt(m)(2p - 1)`.
    pub mu: f64,
    /// `sqrt(lambda_{k-1,l})(2p - 1)`.
    pub beta: f64,
    /// `sqrt(4n) int sqrt(f) phi_{k-1,l}`.
    pub beta_star: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub k: u32,
    pub cells: Vec<CellRecord>,
}

/// Detail term of one level: the mean of `sum_l H^2(g_{m,p}, phi_beta*)`
/// with `m` drawn under each experiment, and their average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelTerm {
    pub k: u32,
    pub poisson_mean: f64,
    pub poisson_se: f64,
    pub noise_mean: f64,
    pub noise_se: f64,
    pub surrogate: f64,
    pub surrogate_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub n: u64,
    pub k0: u32,
    pub k1: u32,
    pub replicates: usize,
    /// `H^2(g_{lambda}, phi_{h / sigma})` for every base cell.
    pub base_cells: Vec<f64>,
    /// Product-form combination of `base_cells`.
    pub base: f64,
    pub levels: Vec<LevelTerm>,
    /// Cell records of the first Poisson-side replicate.
    pub rows: Vec<DecompositionRow>,
    pub total: f64,
    pub total_se: f64,
}

struct LevelCells {
    p: Vec<f64>,
    lambda: Vec<f64>,
    beta_star: Vec<f64>,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Cells whose split probability is exactly one half and whose drift
/// vanishes contribute nothing for any `m`.
fn cell_distance(
    cache: &mut FmCache,
    memo: &mut HashMap<(u32, u64, u64), f64>,
    k: u32,
    l: u64,
    m: u64,
    p: f64,
    beta_star: f64,
) -> Result<f64> {
    if p == 0.5 && beta_star == 0.0 {
        return Ok(0.0);
    }
    if let Some(&v) = memo.get(&(k, l, m)) {
        return Ok(v);
    }
    let v = binomial_distance(cache, m, p, beta_star)?;
    memo.insert((k, l, m), v);
    Ok(v)
}

/// Estimates the squared Hellinger distance between the Poisson-process
/// experiment mapped through `T_n` and the white-noise experiment.
///
/// The base level is exact: every base cell contributes
/// `H^2(g_{lambda_l}, phi_{h_l / sigma_{k0}})` and the cells combine in
/// product form. Each detail level `k` contributes
/// `sum_l H^2(g_{m,p}, phi_beta*)` averaged over the conditioning counts
/// `m = N_{k-1,l}`; the average is taken under the Poisson law and under
/// counts recovered from simulated white noise by the inverse map, and the
/// two means are averaged.
pub fn decomposition_estimate(
    f: &DensityModel,
    n: u64,
    k0: u32,
    k1: u32,
    replicates: usize,
    seed: u64,
) -> Result<Decomposition> {
    if replicates < 2 {
        return Err(Error::InvalidInput("decomposition needs at least 2 replicates".into()));
    }
    if n == 0 || k0 >= k1 {
        return Err(Error::InvalidInput(format!("need n >= 1 and k0 < k1, got n={n}, k0={k0}, k1={k1}")));
    }
    let nf = n as f64;
    let root4n = (4.0 * nf).sqrt();

    let s0 = sigma(k0, n);
    let mut base_cells = Vec::with_capacity(1usize << k0);
    for idx in DyadicIndex::level_iter(k0) {
        let lambda = nf * f.integrate_cell(idx);
        let target = Gaussian::new(f.sqrt_cell_mean(idx)? / s0, 1.0);
        base_cells.push(hellinger_sq(&poisson_root_density(lambda, false)?, &target)?);
    }
    let base = product_hellinger_sq(&base_cells);

    let mut cells = Vec::with_capacity((k1 - k0) as usize);
    for k in k0 + 1..=k1 {
        let mut level = LevelCells { p: Vec::new(), lambda: Vec::new(), beta_star: Vec::new() };
        for parent in DyadicIndex::level_iter(k - 1) {
            level.p.push(f.split_probability(parent));
            level.lambda.push(nf * f.integrate_cell(parent));
            level.beta_star.push(root4n * f.sqrt_haar_coefficient(parent)?);
        }
        cells.push(level);
    }
    let finest_mass: Vec<f64> = DyadicIndex::level_iter(k1).map(|i| nf * f.integrate_cell(i)).collect();
    let sqrt_means = f.level_sqrt_means(k1)?;

    let mut cache = FmCache::new();
    let mut memo = HashMap::new();
    let mut mapper = Mapper::new();
    let levels_n = (k1 - k0) as usize;
    let mut poisson_sums = vec![Vec::with_capacity(replicates); levels_n];
    let mut noise_sums = vec![Vec::with_capacity(replicates); levels_n];
    let mut rows = Vec::new();

    for r in 0..replicates as u64 {
        let mut rng = stream(seed, Purpose::PoissonCount, r);
        let finest = finest_mass
            .iter()
            .map(|&mass| poisson_draw(mass, &mut rng))
            .collect::<Result<Vec<u64>>>()?;
        let poisson = CountPyramid::from_finest(k0, k1, finest)?;

        let mut rng = stream(seed, Purpose::WhiteNoise, r);
        let path = simulate_white_noise_from_means(&sqrt_means, n, &mut rng)?;
        let (noise, _) = mapper.inverse(&analyze_path(&path, k0)?)?;

        for (i, k) in (k0 + 1..=k1).enumerate() {
            let level = &cells[i];
            let mut record = Vec::new();
            for (side, pyramid) in [(0, &poisson), (1, &noise)] {
                let mut total = 0.0;
                for (l, &m) in pyramid.level(k - 1).iter().enumerate() {
                    let (p, bs) = (level.p[l], level.beta_star[l]);
                    let h2 = cell_distance(&mut cache, &mut memo, k, l as u64, m, p, bs)?;
                    total += h2;
                    if side == 0 && r == 0 {
                        record.push(CellRecord {
                            m,
                            p,
                            mu: (m as f64).sqrt() * (2.0 * p - 1.0),
                            beta: level.lambda[l].sqrt() * (2.0 * p - 1.0),
                            beta_star: bs,
                            h2,
                        });
                    }
                }
                if side == 0 {
                    poisson_sums[i].push(total);
                } else {
                    noise_sums[i].push(total);
                }
            }
            if r == 0 {
                rows.push(DecompositionRow { k, cells: record });
            }
        }
    }

    let mut levels = Vec::with_capacity(levels_n);
    let (mut total, mut var) = (base, 0.0);
    for (i, k) in (k0 + 1..=k1).enumerate() {
        let (pm, pse) = mean_se(&poisson_sums[i]);
        let (nm, nse) = mean_se(&noise_sums[i]);
        let surrogate = 0.5 * (pm + nm);
        let surrogate_se = 0.5 * (pse * pse + nse * nse).sqrt();
        total += surrogate;
        var += surrogate_se * surrogate_se;
        levels.push(LevelTerm {
            k,
            poisson_mean: pm,
            poisson_se: pse,
            noise_mean: nm,
            noise_se: nse,
            surrogate,
            surrogate_se,
        });
    }
    Ok(Decomposition {
        n,
        k0,
        k1,
        replicates,
        base_cells,
        base,
        levels,
        rows,
        total,
        total_se: var.sqrt(),
    })
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_density, DensitySpec, FamilySpec};
    use crate::dyadic::besov_tail_pow;
    use crate::metrics::hellinger::gaussian_pair_hellinger_sq;

    fn uniform() -> DensityModel {
        make_density(&DensitySpec::new(FamilySpec::Uniform, 1.0)).unwrap()
    }

    fn linear() -> DensityModel {
        make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5)).unwrap()
    }

    #[test]
    fn uniform_bound_is_first_term() {
        let b = thm3_bound(&uniform(), 4096, 3, 20, Thm3Constants::UNIT).unwrap();
        assert_eq!(b.term2, 0.0);
        assert_eq!(b.term3, 0.0);
        assert_eq!(b.total, 64.0 / 4096.0);
    }

    #[test]
    fn linear_sums_agree_with_besov_tail() {
        let f = linear();
        for k0 in [0, 3, 5] {
            let s = haar_sums(&f, k0, 20).unwrap();
            let tail = besov_tail_pow(&f, 0.5, 2.0, 2.0, k0, 20).unwrap();
            assert!((s.square - tail).abs() < 1e-10);
            // Closed form up to the truncation at level 20.
            let closed = (-(k0 as f64) - 3.0).exp2() - (-24.0f64).exp2();
            assert!((s.square - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_scaling_in_k0() {
        let f = linear();
        let a = thm3_bound(&f, 4096, 3, 12, Thm3Constants::UNIT).unwrap();
        let b = thm3_bound(&f, 4096, 4, 12, Thm3Constants::UNIT).unwrap();
        assert!((b.term1 / a.term1 - 4.0).abs() < 1e-14);
        let sa = haar_sums(&f, 3, 12).unwrap().fourth;
        let sb = haar_sums(&f, 4, 12).unwrap().fourth;
        let prefactor = |t: f64, s: f64| t / s;
        assert!((prefactor(a.term3, sa) / prefactor(b.term3, sb) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_details_vanish() {
        let d = decomposition_estimate(&uniform(), 1024, 2, 6, 2, 1).unwrap();
        assert!(d.levels.iter().all(|l| l.surrogate == 0.0 && l.poisson_mean == 0.0 && l.noise_mean == 0.0));
        assert_eq!(d.total, d.base);
        let single = d.base_cells[0];
        assert!(d.base_cells.iter().all(|&c| c == single));
        assert!((d.total - product_hellinger_sq(&[single; 4])).abs() < 1e-18);
    }

    #[test]
    fn product_form_matches_two_dimensional_quadrature() {
        // Two independent coordinates: N(0,1) x N(0,1) against N(a,1) x N(0, s^2).
        let (a, s) = (0.7, 1.3);
        let h1 = gaussian_pair_hellinger_sq(0.0, 1.0, a, 1.0);
        let h2 = gaussian_pair_hellinger_sq(0.0, 1.0, 0.0, s);
        let phi = |x: f64, m: f64, sd: f64| (-0.5 * ((x - m) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let step = 0.01;
        let mut joint = 0.0;
        let grid = (0..2000).map(|i| -10.0 + (i as f64 + 0.5) * step);
        for x in grid.clone() {
            for y in grid.clone() {
                let g1 = phi(x, 0.0, 1.0) * phi(y, 0.0, 1.0);
                let g2 = phi(x, a, 1.0) * phi(y, 0.0, s);
                joint += (g1.sqrt() - g2.sqrt()).powi(2) * step * step;
            }
        }
        assert!((product_hellinger_sq(&[h1, h2]) - joint).abs() < 1e-8);
    }

    #[test]
    fn linear_decomposition_is_small_and_positive() {
        let d = decomposition_estimate(&linear(), 1024, 2, 10, 3, 5).unwrap();
        assert!(d.total > d.base && d.total < 0.05);
        assert!(d.rows.iter().all(|r| r.cells.len() == 1usize << (r.k - 1)));
        let b = thm3_bound(&linear(), 1024, 2, 10, Thm3Constants::UNIT).unwrap();
        assert!(b.total.is_finite());
    }
}

//! Sampling, histogram estimates and the sample-size randomizations.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::density::{make_density, DensityModel, DensitySpec, FamilySpec, FixedSample, PointProcessSample};
use crate::dyadic::StepFunction;
use crate::error::{Error, Result};

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// A Poisson process with intensity `n f`: `N ~ Poisson(n)` points drawn
/// i.i.d. from `f`.
pub fn sample_poisson_process<R: Rng + ?Sized>(
    f: &DensityModel,
    n: u64,
    rng: &mut R,
) -> Result<PointProcessSample> {
    let count = poisson_count(n as f64, rng)?;
    let points = f.sample_points(count, rng)?;
    Ok(PointProcessSample { count, points })
}

/// `n` i.i.d. draws from `f`, in draw order.
pub fn sample_fixed<R: Rng + ?Sized>(f: &DensityModel, n: usize, rng: &mut R) -> Result<FixedSample> {
    FixedSample::new(f.draw_iid(n, rng)?)
}

/// Level-`k0` histogram `2^{k0} #{X_i in I_{k0,l}} / normalizer`.
pub fn histogram_estimate(points: &[f64], normalizer: f64, k0: u32) -> Result<StepFunction> {
    if normalizer.is_nan() || normalizer <= 0.0 {
        return Err(Error::InvalidInput(format!("histogram normalizer {normalizer}")));
    }
    let cells = 1usize << k0;
    let mut counts = vec![0.0; cells];
    for &x in points {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::PointOutOfRange(x));
        }
        counts[((x * cells as f64) as usize).min(cells - 1)] += 1.0;
    }
    let scale = cells as f64 / normalizer;
    StepFunction::new(k0, counts.into_iter().map(|c| c * scale).collect())
}

/// The histogram floored at `eps0 / 2` and renormalized, as a density.
pub fn floored_histogram(hist: &StepFunction, eps0: f64) -> Result<DensityModel> {
    if eps0.is_nan() || eps0 <= 0.0 {
        return Err(Error::InvalidInput(format!("eps0 = {eps0}")));
    }
    let floored: Vec<f64> = hist.values.iter().map(|&v| v.max(0.5 * eps0)).collect();
    let mass = floored.iter().sum::<f64>() / floored.len() as f64;
    let values: Vec<f64> = floored.iter().map(|v| v / mass).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    make_density(&DensitySpec::new(FamilySpec::PiecewiseConstant { level: hist.level, values }, min))
}

/// Turns a fixed sample of size `n` into a Poisson-process sample: draw
/// `N ~ Poisson(n)`, keep the first `N` points, and if `N > n` top up from
/// the floored level-`k0` histogram of the sample.
pub fn randomize_to_poisson<R: Rng + ?Sized>(
    sample: &FixedSample,
    k0: u32,
    eps0: f64,
    rng: &mut R,
) -> Result<PointProcessSample> {
    let n = sample.points.len();
    let target = poisson_count(n as f64, rng)?;
    let mut points: Vec<f64> = sample.points.iter().take(target).copied().collect();
    if target > n {
        let hist = histogram_estimate(&sample.points, n as f64, k0)?;
        points.extend(floored_histogram(&hist, eps0)?.draw_iid(target - n, rng)?);
    }
    PointProcessSample::new(points)
}

/// Turns a Poisson-process sample into a fixed sample of size `n`: shuffle
/// the (sorted) points, keep `n` of them, and if fewer are available top up
/// from the floored level-`k0` histogram normalized by `n`.
pub fn randomize_to_fixed<R: Rng + ?Sized>(
    sample: &PointProcessSample,
    n: usize,
    k0: u32,
    eps0: f64,
    rng: &mut R,
) -> Result<FixedSample> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut points = sample.points.clone();
    points.shuffle(rng);
    if points.len() >= n {
        points.truncate(n);
    } else {
        let hist = histogram_estimate(&sample.points, n as f64, k0)?;
        let extra = floored_histogram(&hist, eps0)?.draw_iid(n - points.len(), rng)?;
        points.extend(extra);
    }
    FixedSample::new(points)
}

/// Smallest `k` with `4^k / n >= gamma_k`; `gamma` is extended by its last
/// entry and must be nonnegative and nonincreasing.
pub fn choose_k0(n: u64, gamma: &[f64]) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let Some(&last) = gamma.last() else {
        return Err(Error::InvalidInput("gamma must be nonempty".into()));
    };
    if gamma.iter().any(|g| !(g.is_finite() && *g >= 0.0)) || gamma.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("gamma must be finite, nonnegative and nonincreasing".into()));
    }
    for k in 0..=crate::transforms::pyramid::MAX_PYRAMID_LEVEL {
        let g = gamma.get(k as usize).copied().unwrap_or(last);
        if (2.0 * k as f64).exp2() / n as f64 >= g {
            return Ok(k);
        }
    }
    Err(Error::Domain(format!("no admissible k0 for n = {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear_gamma() -> Vec<f64> {
        (0..40).map(|k| (-(k as f64) - 3.0).exp2()).collect()
    }

    #[test]
    fn k0_for_linear_bias() {
        let g = linear_gamma();
        let picks: Vec<u32> = [8, 10, 12, 14].iter().map(|&e| choose_k0(1 << e, &g).unwrap()).collect();
        assert_eq!(picks, vec![2, 3, 3, 4]);
        assert_eq!(choose_k0(1000, &[0.0]).unwrap(), 0);
        assert!(choose_k0(10, &[]).is_err());
        assert!(choose_k0(10, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn histogram_and_floor() {
        let h = histogram_estimate(&[0.1, 0.2, 0.3, 0.9], 4.0, 1).unwrap();
        assert_eq!(h.values, vec![1.5, 0.5]);
        let empty = histogram_estimate(&[], 4.0, 2).unwrap();
        let f = floored_histogram(&empty, 0.5).unwrap();
        assert!((f.pdf(0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn randomizations_have_expected_sizes() {
        let f = make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fixed = sample_fixed(&f, 500, &mut rng).unwrap();
        let mut total = 0usize;
        for _ in 0..200 {
            let p = randomize_to_poisson(&fixed, 3, 0.5, &mut rng).unwrap();
            total += p.count;
            let back = randomize_to_fixed(&p, 500, 3, 0.5, &mut rng).unwrap();
            assert_eq!(back.n, 500);
        }
        let mean = total as f64 / 200.0;
        assert!((mean - 500.0).abs() < 4.0 * (500.0f64 / 200.0).sqrt());
    }

    #[test]
    fn empty_process_tops_up_from_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fixed = randomize_to_fixed(&PointProcessSample::empty(), 10, 2, 0.5, &mut rng).unwrap();
        assert_eq!(fixed.n, 10);
    }
}

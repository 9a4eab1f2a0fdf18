//! Dyadic cells, the Haar basis, piecewise averages and Besov norms.

use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{Error, Result};

/// Truncation level used for Besov sums when the caller has no preference.
pub const DEFAULT_K_MAX: u32 = 20;

/// Deepest level the crate will index (cells of width 2^-52 are still exact).
pub const MAX_LEVEL: u32 = 52;

/// The dyadic cell `I_{k,l} = [l / 2^k, (l + 1) / 2^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub level: u32,
    pub position: u64,
}

impl DyadicIndex {
    pub fn new(level: u32, position: u64) -> Result<Self> {
        if level > MAX_LEVEL || position >= 1u64 << level {
            return Err(Error::InvalidIndex { level, position });
        }
        Ok(Self { level, position })
    }

    /// Width `2^-k` of the cell.
    #[inline]
    pub fn width(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Half-open interval `[a, b)` covered by the cell.
    pub fn cell(&self) -> (f64, f64) {
        let w = self.width();
        (self.position as f64 * w, (self.position + 1) as f64 * w)
    }

    pub fn midpoint(&self) -> f64 {
        (self.position as f64 + 0.5) * self.width()
    }

    /// Left and right halves, i.e. `I_{k+1,2l}` and `I_{k+1,2l+1}`.
    pub fn children(&self) -> (Self, Self) {
        let level = self.level + 1;
        (
            Self { level, position: 2 * self.position },
            Self { level, position: 2 * self.position + 1 },
        )
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            position: self.position / 2,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        let (a, b) = self.cell();
        a <= x && x < b
    }

    /// All cells at `level`, in order.
    pub fn level_iter(level: u32) -> impl Iterator<Item = Self> {
        (0..1u64 << level).map(move |position| Self { level, position })
    }
}

/// Cell interval for `index`.
pub fn cell(index: DyadicIndex) -> (f64, f64) {
    index.cell()
}

/// The Haar function `phi_{k,l} = 2^{k/2} (1_{left half} - 1_{right half})`.
pub fn haar_eval(index: DyadicIndex, x: f64) -> f64 {
    let (a, b) = index.cell();
    if !(a <= x && x < b) {
        return 0.0;
    }
    let height = (0.5 * index.level as f64).exp2();
    if x < index.midpoint() {
        height
    } else {
        -height
    }
}

/// Haar coefficient `theta_{k,l} = int f phi_{k,l}`, from exact cell integrals.
pub fn haar_coefficient(f: &DensityModel, index: DyadicIndex) -> f64 {
    f.haar_coefficient(index)
}

/// A function that is constant on each cell of one dyadic level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub level: u32,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(level: u32, values: Vec<f64>) -> Result<Self> {
        if level > 30 || values.len() != 1usize << level {
            return Err(Error::InvalidInput(format!(
                "step function at level {level} needs {} values, got {}",
                1u64 << level.min(63),
                values.len()
            )));
        }
        Ok(Self { level, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..1.0).contains(&x) {
            return 0.0;
        }
        let i = ((x * self.values.len() as f64) as usize).min(self.values.len() - 1);
        self.values[i]
    }

    /// `int_0^1` of the function.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Values on the cells of a finer level.
    pub fn refine_to(&self, level: u32) -> Vec<f64> {
        assert!(level >= self.level);
        let rep = 1usize << (level - self.level);
        self.values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, rep))
            .collect()
    }

    /// `int |self - other|^p` for two step functions.
    pub fn lp_distance_pow(&self, other: &StepFunction, p: f64) -> f64 {
        let level = self.level.max(other.level);
        let a = self.refine_to(level);
        let b = other.refine_to(level);
        let w = (-(level as f64)).exp2();
        a.iter().zip(&b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>() * w
    }
}

/// Piecewise average `f_bar_k`, whose value on `I_{k,l}` is `2^k int_{I_{k,l}} f`.
pub fn piecewise_average(f: &DensityModel, k: u32) -> StepFunction {
    StepFunction {
        level: k,
        values: DyadicIndex::level_iter(k).map(|i| f.cell_mean(i)).collect(),
    }
}

/// Haar coefficients for a range of levels, stored level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarCoefficientTable {
    pub k_min: u32,
    pub k_max: u32,
    levels: Vec<Vec<f64>>,
}

impl HaarCoefficientTable {
    pub fn compute(f: &DensityModel, k_min: u32, k_max: u32) -> Result<Self> {
        if k_min > k_max || k_max > 26 {
            return Err(Error::InvalidInput(format!(
                "coefficient table levels {k_min}..={k_max}"
            )));
        }
        let levels = (k_min..=k_max).map(|k| level_coefficients(f, k)).collect();
        Ok(Self { k_min, k_max, levels })
    }

    pub fn get(&self, index: DyadicIndex) -> Option<f64> {
        if index.level < self.k_min || index.level > self.k_max {
            return None;
        }
        self.levels[(index.level - self.k_min) as usize]
            .get(index.position as usize)
            .copied()
    }

    pub fn level(&self, k: u32) -> Option<&[f64]> {
        (self.k_min..=self.k_max)
            .contains(&k)
            .then(|| self.levels[(k - self.k_min) as usize].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicIndex, f64)> + '_ {
        self.levels.iter().enumerate().flat_map(move |(i, row)| {
            let level = self.k_min + i as u32;
            row.iter().enumerate().map(move |(l, &theta)| {
                (DyadicIndex { level, position: l as u64 }, theta)
            })
        })
    }
}

/// All coefficients of one level. Levels at or beyond the resolution of a
/// step density are identically zero and skipped.
pub fn level_coefficients(f: &DensityModel, k: u32) -> Vec<f64> {
    if f.step_level().is_some_and(|s| k >= s) {
        return vec![0.0; 1usize << k];
    }
    DyadicIndex::level_iter(k).map(|i| f.haar_coefficient(i)).collect()
}

/// `sum_l |theta_{k,l}|^p` at one level.
pub fn level_power_sum(f: &DensityModel, k: u32, p: f64) -> f64 {
    if f.step_level().is_some_and(|s| k >= s) {
        return 0.0;
    }
    DyadicIndex::level_iter(k)
        .map(|i| f.haar_coefficient(i).abs().powf(p))
        .sum()
}

fn check_besov(p: f64, q: f64) -> Result<()> {
    if (p == 2.0 && q == 2.0) || (p == 4.0 && q == 4.0) {
        Ok(())
    } else {
        Err(Error::UnsupportedBesov { p, q })
    }
}

/// The `q`-th power of the Besov tail from level `k0` through `k_max`.
pub fn besov_tail_pow(
    f: &DensityModel,
    alpha: f64,
    p: f64,
    q: f64,
    k0: u32,
    k_max: u32,
) -> Result<f64> {
    check_besov(p, q)?;
    if k_max < k0 {
        return Err(Error::InvalidInput(format!("k_max {k_max} < k0 {k0}")));
    }
    let last = f.step_level().map_or(k_max, |s| k_max.min(s.saturating_sub(1)));
    let mut total = 0.0;
    // Coarse-to-fine terms decay geometrically; sum fine-to-coarse so the
    // small terms are added first.
    for k in (k0..=last).rev() {
        let s = level_power_sum(f, k, p);
        if s == 0.0 {
            continue;
        }
        let weight = (k as f64 * (alpha + 0.5 - 1.0 / p)).exp2();
        total += (weight * s.powf(1.0 / p)).powf(q);
    }
    Ok(total)
}

/// Besov tail `||f - f_bar_{k0}||_{alpha,p,q}` truncated at `k_max`.
pub fn besov_tail_norm(
    f: &DensityModel,
    alpha: f64,
    p: f64,
    q: f64,
    k0: u32,
    k_max: u32,
) -> Result<f64> {
    Ok(besov_tail_pow(f, alpha, p, q, k0, k_max)?.powf(1.0 / q))
}

/// Besov norm `||f||_{alpha,p,q}` truncated at `k_max`.
pub fn besov_norm(f: &DensityModel, alpha: f64, p: f64, q: f64, k_max: u32) -> Result<f64> {
    let tail = besov_tail_pow(f, alpha, p, q, 0, k_max)?;
    Ok((f.total_mass().abs().powf(q) + tail).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_density, DensitySpec, FamilySpec};

    fn linear() -> DensityModel {
        make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5)).unwrap()
    }

    fn uniform() -> DensityModel {
        make_density(&DensitySpec::new(FamilySpec::Uniform, 1.0)).unwrap()
    }

    fn bump(level: u32, position: u64, amplitude: f64) -> DensityModel {
        make_density(&DensitySpec::new(
            FamilySpec::SingleHaarBump { level, position, amplitude },
            0.25,
        ))
        .unwrap()
    }

    #[test]
    fn cells() {
        assert_eq!(DyadicIndex::new(0, 0).unwrap().cell(), (0.0, 1.0));
        assert_eq!(DyadicIndex::new(2, 3).unwrap().cell(), (0.75, 1.0));
        assert!(DyadicIndex::new(3, 8).is_err());
        let i = DyadicIndex::new(3, 5).unwrap();
        assert_eq!(i.children().0.parent(), Some(i));
        assert_eq!(DyadicIndex::new(0, 0).unwrap().parent(), None);
    }

    #[test]
    fn haar_values() {
        let root = DyadicIndex::new(0, 0).unwrap();
        assert_eq!(haar_eval(root, 0.25), 1.0);
        assert_eq!(haar_eval(root, 0.75), -1.0);
        assert_eq!(haar_eval(DyadicIndex::new(2, 1).unwrap(), 0.30), 2.0);
        assert_eq!(haar_eval(DyadicIndex::new(2, 1).unwrap(), 0.60), 0.0);
    }

    #[test]
    fn orthonormal_to_level_six() {
        let all: Vec<_> = (0..=6).flat_map(DyadicIndex::level_iter).collect();
        // Independent check: integrate the product on the level-8 grid using
        // midpoint values, exact for step functions on coarser grids.
        let grid: Vec<f64> = (0..256).map(|i| (i as f64 + 0.5) / 256.0).collect();
        for &a in all.iter().step_by(7) {
            for &b in &all {
                let direct: f64 =
                    grid.iter().map(|&x| haar_eval(a, x) * haar_eval(b, x)).sum::<f64>() / 256.0;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((direct - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_coefficients_closed_form() {
        let f = linear();
        assert!((haar_coefficient(&f, DyadicIndex::new(0, 0).unwrap()) + 0.25).abs() < 1e-15);
        for k in 0..12 {
            let expected = -(-(1.5 * k as f64) - 2.0).exp2();
            for l in [0, (1u64 << k) - 1] {
                let idx = DyadicIndex::new(k, l).unwrap();
                let got = haar_coefficient(&f, idx);
                assert!((got / expected - 1.0).abs() < 1e-12, "k={k}");
                // Independent oracle: midpoint-rule integration of f phi.
                let (a, b) = idx.cell();
                let m = 2000;
                let h = (b - a) / m as f64;
                let direct: f64 = (0..m)
                    .map(|i| {
                        let x = a + (i as f64 + 0.5) * h;
                        (0.5 + x) * haar_eval(idx, x)
                    })
                    .sum::<f64>()
                    * h;
                assert!((direct - expected).abs() < 1e-9 * expected.abs().max(1e-300) + 1e-15);
            }
        }
    }

    #[test]
    fn piecewise_averages() {
        assert_eq!(piecewise_average(&uniform(), 3).values, vec![1.0; 8]);
        let f = linear();
        let s = piecewise_average(&f, 1);
        assert!((s.values[0] - 0.75).abs() < 1e-15 && (s.values[1] - 1.25).abs() < 1e-15);
        assert!((piecewise_average(&f, 0).values[0] - 1.0).abs() < 1e-15);
        assert!((piecewise_average(&f, 7).integral() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn besov_examples() {
        let u = uniform();
        assert_eq!(besov_tail_norm(&u, 0.5, 2.0, 2.0, 0, 20).unwrap(), 0.0);
        assert_eq!(besov_norm(&u, 0.5, 2.0, 2.0, 20).unwrap(), 1.0);

        let f = linear();
        // Oracle: direct summation of 2^{-k-4}.
        let oracle: f64 = (0..=20).map(|k| (-(k as f64) - 4.0).exp2()).sum();
        let tail = besov_tail_pow(&f, 0.5, 2.0, 2.0, 0, 20).unwrap();
        assert!((tail - oracle).abs() < 1e-14);
        assert!((tail - 0.125).abs() < 1e-6);
        let norm = besov_norm(&f, 0.5, 2.0, 2.0, 20).unwrap();
        assert!((norm - (1.0 + oracle).sqrt()).abs() < 1e-14);

        let (k, a) = (3, 0.1);
        let b = bump(k, 5, a);
        let expected = (k as f64).exp2() * a * a;
        for k0 in 0..=k {
            let t = besov_tail_pow(&b, 0.5, 2.0, 2.0, k0, 20).unwrap();
            assert!((t - expected).abs() < 1e-15, "k0={k0}");
        }
        assert_eq!(besov_tail_pow(&b, 0.5, 2.0, 2.0, k + 1, 20).unwrap(), 0.0);
        let n = besov_norm(&b, 0.5, 2.0, 2.0, 20).unwrap();
        assert!((n - (1.0 + expected).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn besov_rejects_other_exponents() {
        assert!(matches!(
            besov_tail_norm(&linear(), 0.5, 1.0, 2.0, 0, 5),
            Err(Error::UnsupportedBesov { .. })
        ));
        assert!(besov_tail_norm(&linear(), 0.5, 4.0, 4.0, 0, 5).is_ok());
    }

    #[test]
    fn table_lookup() {
        let t = HaarCoefficientTable::compute(&linear(), 1, 4).unwrap();
        assert_eq!(t.get(DyadicIndex::new(0, 0).unwrap()), None);
        assert_eq!(t.level(3).unwrap().len(), 8);
        assert_eq!(t.iter().count(), 2 + 4 + 8 + 16);
    }
}

//! Density models on `[0, 1]` with exact dyadic cell integrals.
//!
//! Four families are supported: piecewise constant on a dyadic level (which
//! also covers the uniform density and single Haar bumps), linear, and
//! finite Fourier series. Cell integrals and Haar coefficients are closed
//! form; only quantities involving `sqrt(f)` need quadrature, and those are
//! written as integrals of nonnegative remainders so that no cancellation
//! occurs when `f` is nearly constant on a cell.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicIndex;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const NORMALIZATION_TOL: f64 = 1e-12;
const FOURIER_GRID_LEVEL: u32 = 16;
const MAX_STEP_LEVEL: u32 = 24;

/// Family description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum FamilySpec {
    Uniform,
    PiecewiseConstant {
        level: u32,
        values: Vec<f64>,
    },
    Linear {
        a: f64,
        b: f64,
    },
    /// Coefficients `c_0, c_1, ...` as `[re, im]` pairs; negative frequencies
    /// follow from Hermitian symmetry.
    Fourier {
        coefficients: Vec<[f64; 2]>,
    },
    SingleHaarBump {
        level: u32,
        position: u64,
        amplitude: f64,
    },
}

/// `1 - sin(t) / t`, accurate for small `t`.
fn one_minus_sinc(t: f64) -> f64 {
    let t2 = t * t;
    if t2 < 0.1 {
        let tail = 1.0 - t2 / 110.0 * (1.0 - t2 / 156.0);
        t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0 * tail)))
    } else {
        1.0 - t.sin() / t
    }
}

/// A family plus the claimed lower bound `eps0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    #[serde(flatten)]
    pub family: FamilySpec,
    pub eps0: f64,
}

impl DensitySpec {
    pub fn new(family: FamilySpec, eps0: f64) -> Self {
        Self { family, eps0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Constant on the cells of dyadic level `level`.
    Steps { level: u32, values: Vec<f64>, cumulative: Vec<f64> },
    Linear { a: f64, b: f64 },
    /// `f = 1 + sum_{n>=1} 2 (re_n cos(2 pi n x) - im_n sin(2 pi n x))`.
    Fourier { coefficients: Vec<(f64, f64)> },
}

/// Norms describing membership in the smoothness classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassNorms {
    pub lipschitz: f64,
    pub sobolev: f64,
}

/// An immutable density with a certified lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    spec: DensitySpec,
    repr: Repr,
    minimum: f64,
}

/// Validates a specification and builds the model.
pub fn make_density(spec: &DensitySpec) -> Result<DensityModel> {
    DensityModel::new(spec.clone())
}

fn steps(level: u32, values: Vec<f64>) -> Repr {
    let w = (-(level as f64)).exp2();
    let mut cumulative = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for v in &values {
        acc += v * w;
        cumulative.push(acc);
    }
    Repr::Steps { level, values, cumulative }
}

impl DensityModel {
    pub fn new(spec: DensitySpec) -> Result<Self> {
        if !(spec.eps0 > 0.0 && spec.eps0.is_finite()) {
            return Err(Error::InvalidDensity(format!("eps0 must be positive, got {}", spec.eps0)));
        }
        let (repr, minimum, mass) = match &spec.family {
            FamilySpec::Uniform => (steps(0, vec![1.0]), 1.0, 1.0),
            FamilySpec::PiecewiseConstant { level, values } => {
                if *level > MAX_STEP_LEVEL || values.len() != 1usize << level {
                    return Err(Error::InvalidDensity(format!(
                        "piecewise-constant level {level} needs {} values, got {}",
                        1u64 << (*level).min(MAX_STEP_LEVEL + 1),
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidDensity("non-finite value".into()));
                }
                let mass = values.iter().sum::<f64>() / values.len() as f64;
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                (steps(*level, values.clone()), min, mass)
            }
            FamilySpec::Linear { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidDensity("non-finite coefficient".into()));
                }
                (Repr::Linear { a: *a, b: *b }, a.min(a + b), a + 0.5 * b)
            }
            FamilySpec::Fourier { coefficients } => {
                let Some(c0) = coefficients.first() else {
                    return Err(Error::InvalidDensity("fourier series needs c_0".into()));
                };
                if c0[1] != 0.0 {
                    return Err(Error::InvalidDensity("c_0 must be real".into()));
                }
                if coefficients.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidDensity("non-finite coefficient".into()));
                }
                let coefficients: Vec<(f64, f64)> =
                    coefficients[1..].iter().map(|c| (c[0], c[1])).collect();
                let repr = Repr::Fourier { coefficients };
                let min = certified_fourier_minimum(&repr);
                (repr, min, c0[0])
            }
            FamilySpec::SingleHaarBump { level, position, amplitude } => {
                let idx = DyadicIndex::new(*level, *position)?;
                if *level + 1 > MAX_STEP_LEVEL || !amplitude.is_finite() {
                    return Err(Error::InvalidDensity(format!("bump at level {level}")));
                }
                let fine = level + 1;
                let mut values = vec![1.0; 1usize << fine];
                let height = amplitude * (0.5 * *level as f64).exp2();
                let (left, right) = idx.children();
                values[left.position as usize] = 1.0 + height;
                values[right.position as usize] = 1.0 - height;
                (steps(fine, values), 1.0 - height.abs(), 1.0)
            }
        };
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!("integrates to {mass}, not 1")));
        }
        if minimum < 0.0 {
            return Err(Error::InvalidDensity(format!("negative density (minimum {minimum})")));
        }
        if minimum < spec.eps0 {
            return Err(Error::InvalidDensity(format!(
                "minimum {minimum} is below the claimed eps0 {}",
                spec.eps0
            )));
        }
        Ok(Self { spec, repr, minimum })
    }

    pub fn spec(&self) -> &DensitySpec {
        &self.spec
    }

    pub fn eps0(&self) -> f64 {
        self.spec.eps0
    }

    /// Certified lower bound on `f` (exact for closed-form families).
    pub fn minimum(&self) -> f64 {
        self.minimum
    }

    /// `Some(level)` if `f` is constant on the cells of `level`.
    pub fn step_level(&self) -> Option<u32> {
        match &self.repr {
            Repr::Steps { level, .. } => Some(*level),
            _ => None,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Steps { level, values, .. } => {
                let i = (x * (*level as f64).exp2()).floor();
                values[(i.max(0.0) as usize).min(values.len() - 1)]
            }
            Repr::Linear { a, b } => a + b * x,
            Repr::Fourier { coefficients } => {
                let mut s = 1.0;
                for (n, &(re, im)) in coefficients.iter().enumerate() {
                    let w = 2.0 * PI * (n + 1) as f64 * x;
                    let (sin, cos) = w.sin_cos();
                    s += 2.0 * (re * cos - im * sin);
                }
                s
            }
        }
    }

    /// `F(x) = int_0^x f`, for `x` in `[0, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Steps { level, values, cumulative } => {
                let scale = (*level as f64).exp2();
                let i = ((x * scale).floor() as usize).min(values.len() - 1);
                cumulative[i] + values[i] * (x - i as f64 / scale)
            }
            _ => self.integral(0.0, x),
        }
    }

    /// `int_a^b f` for `0 <= a <= b <= 1`, in closed form.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match &self.repr {
            Repr::Steps { level, values, .. } => {
                let scale = (*level as f64).exp2();
                let first = ((a * scale).floor() as usize).min(values.len() - 1);
                let mut total = 0.0;
                let mut i = first;
                while i < values.len() {
                    let lo = (i as f64 / scale).max(a);
                    let hi = ((i + 1) as f64 / scale).min(b);
                    if hi <= lo {
                        break;
                    }
                    total += values[i] * (hi - lo);
                    i += 1;
                }
                total
            }
            Repr::Linear { a: c, b: s } => (b - a) * (c + s * 0.5 * (a + b)),
            Repr::Fourier { coefficients } => {
                let mut total = b - a;
                for (n, &(re, im)) in coefficients.iter().enumerate() {
                    let w = 2.0 * PI * (n + 1) as f64;
                    let half = (0.5 * w * (b - a)).sin();
                    let (sin_c, cos_c) = (0.5 * w * (a + b)).sin_cos();
                    // int cos = 2 cos(wc) sin(wh)/w, int sin = 2 sin(wc) sin(wh)/w
                    total += 4.0 * half * (re * cos_c - im * sin_c) / w;
                }
                total
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.integral(0.0, 1.0)
    }

    /// `int_{I_{k,l}} f`.
    pub fn integrate_cell(&self, index: DyadicIndex) -> f64 {
        let (a, b) = index.cell();
        self.integral(a, b)
    }

    /// `f_{k,l} = 2^k int_{I_{k,l}} f`.
    pub fn cell_mean(&self, index: DyadicIndex) -> f64 {
        self.integrate_cell(index) / index.width()
    }

    /// `int_{left half} f - int_{right half} f`, without cancellation for
    /// the closed-form families.
    pub fn haar_difference(&self, index: DyadicIndex) -> f64 {
        let (a, b) = index.cell();
        let c = index.midpoint();
        let h = 0.5 * (b - a);
        match &self.repr {
            Repr::Steps { .. } => self.integral(a, c) - self.integral(c, b),
            Repr::Linear { b: slope, .. } => -slope * h * h,
            Repr::Fourier { coefficients } => {
                let mut total = 0.0;
                for (n, &(re, im)) in coefficients.iter().enumerate() {
                    let w = 2.0 * PI * (n + 1) as f64;
                    let s = (0.5 * w * h).sin();
                    let (sin_c, cos_c) = (w * c).sin_cos();
                    total += 2.0 * (4.0 / w) * s * s * (re * sin_c + im * cos_c);
                }
                total
            }
        }
    }

    /// Haar coefficient `theta_{k,l}`.
    pub fn haar_coefficient(&self, index: DyadicIndex) -> f64 {
        (0.5 * index.level as f64).exp2() * self.haar_difference(index)
    }

    /// `p_{k,2l}`: the share of the parent's mass in its left child.
    pub fn split_probability(&self, parent: DyadicIndex) -> f64 {
        let (left, right) = parent.children();
        let l = self.integrate_cell(left);
        let r = self.integrate_cell(right);
        l / (l + r)
    }

    /// `f(x) - f_{k,l}` for `x` in the cell, without the cancellation of
    /// subtracting two numbers close to the mean.
    fn deviation(&self, x: f64, index: DyadicIndex, mean: f64) -> f64 {
        match &self.repr {
            Repr::Steps { .. } => self.pdf(x) - mean,
            Repr::Linear { b, .. } => b * (x - index.midpoint()),
            Repr::Fourier { coefficients } => {
                let c = index.midpoint();
                let h = 0.5 * index.width();
                let mut total = 0.0;
                for (n, &(re, im)) in coefficients.iter().enumerate() {
                    let w = 2.0 * PI * (n + 1) as f64;
                    // cos(wx) - mean of cos over the cell, and likewise for sin.
                    let (sin_s, cos_s) = (0.5 * w * (x + c)).sin_cos();
                    let half_diff = (0.5 * w * (x - c)).sin();
                    let (sin_c, cos_c) = (w * c).sin_cos();
                    let gap = one_minus_sinc(w * h);
                    let dcos = -2.0 * sin_s * half_diff + cos_c * gap;
                    let dsin = 2.0 * cos_s * half_diff + sin_c * gap;
                    total += 2.0 * (re * dcos - im * dsin);
                }
                total
            }
        }
    }

    /// `int_a^b g(f(x), f(x) - f_{k,l}) dx` over a subinterval of the cell.
    /// Exact for step densities, adaptive quadrature otherwise.
    fn integrate_in_cell<G: Fn(f64, f64) -> f64>(
        &self,
        index: DyadicIndex,
        a: f64,
        b: f64,
        g: &G,
    ) -> Result<f64> {
        let mean = self.cell_mean(index);
        match &self.repr {
            Repr::Steps { level, values, .. } => {
                let scale = (*level as f64).exp2();
                let mut total = 0.0;
                let mut i = ((a * scale).floor() as usize).min(values.len() - 1);
                while i < values.len() {
                    let lo = (i as f64 / scale).max(a);
                    let hi = ((i + 1) as f64 / scale).min(b);
                    if hi <= lo {
                        break;
                    }
                    total += g(values[i], values[i] - mean) * (hi - lo);
                    i += 1;
                }
                Ok(total)
            }
            _ => {
                let tol = Tolerance::new(1e-300, 1e-12);
                quad::integrate_segments(
                    |x| g(self.pdf(x), self.deviation(x, index, mean)),
                    &[a, b],
                    tol,
                )
            }
        }
    }

    /// Integrand of the Jensen remainder `d^2 / (2 sqrt(m) (sqrt(m) + sqrt(f))^2)`
    /// with `d = f - m`.
    fn remainder(mean: f64) -> impl Fn(f64, f64) -> f64 {
        let sm = mean.sqrt();
        move |v: f64, d: f64| {
            let s = sm + v.sqrt();
            d * d / (2.0 * sm * s * s)
        }
    }

    /// Jensen gap `sqrt(f_{k,l}) - h_{k,l} >= 0`, computed from a
    /// nonnegative integrand.
    pub fn jensen_gap(&self, index: DyadicIndex) -> Result<f64> {
        let (a, b) = index.cell();
        let mean = self.cell_mean(index);
        Ok(self.integrate_in_cell(index, a, b, &Self::remainder(mean))? / index.width())
    }

    /// `h_{k,l} = 2^k int_{I_{k,l}} sqrt(f)`.
    pub fn sqrt_cell_mean(&self, index: DyadicIndex) -> Result<f64> {
        Ok(self.cell_mean(index).sqrt() - self.jensen_gap(index)?)
    }

    /// The correction `c` in `int h phi_{k,l} = theta_{k,l} / (2 sqrt(f_{k,l})) - c`.
    pub fn sqrt_haar_correction(&self, index: DyadicIndex) -> Result<f64> {
        let (a, b) = index.cell();
        let c = index.midpoint();
        let g = Self::remainder(self.cell_mean(index));
        let left = self.integrate_in_cell(index, a, c, &g)?;
        let right = self.integrate_in_cell(index, c, b, &g)?;
        Ok((0.5 * index.level as f64).exp2() * (left - right))
    }

    /// `int h phi_{k,l}` with `h = sqrt(f)`.
    pub fn sqrt_haar_coefficient(&self, index: DyadicIndex) -> Result<f64> {
        let mean = self.cell_mean(index);
        Ok(self.haar_coefficient(index) / (2.0 * mean.sqrt()) - self.sqrt_haar_correction(index)?)
    }

    /// `int_{I_{k,l}} (f - f_{k,l})^2`.
    pub fn cell_variation(&self, index: DyadicIndex) -> Result<f64> {
        let (a, b) = index.cell();
        match &self.repr {
            Repr::Linear { b: slope, .. } => {
                let w = b - a;
                Ok(slope * slope * w * w * w / 12.0)
            }
            _ => self.integrate_in_cell(index, a, b, &|_, d: f64| d * d),
        }
    }

    /// `int_{I_{k,l}} (sqrt(c) - sqrt(f))^2` for a constant `c >= 0`.
    pub fn cell_sqrt_distance(&self, index: DyadicIndex, c: f64) -> Result<f64> {
        let mean = self.cell_mean(index);
        let gap = self.jensen_gap(index)?;
        let h = mean.sqrt() - gap;
        let d = c.sqrt() - h;
        Ok(index.width() * (d * d + gap * (mean.sqrt() + h)))
    }

    /// Cell means for every cell of level `k`.
    pub fn level_means(&self, k: u32) -> Vec<f64> {
        DyadicIndex::level_iter(k).map(|i| self.cell_mean(i)).collect()
    }

    /// `h_{k,l}` for every cell of level `k`.
    pub fn level_sqrt_means(&self, k: u32) -> Result<Vec<f64>> {
        DyadicIndex::level_iter(k).map(|i| self.sqrt_cell_mean(i)).collect()
    }

    /// Inverse of the CDF at `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile level {u}")));
        }
        match &self.repr {
            Repr::Steps { level, values, cumulative } => {
                let i = cumulative.partition_point(|&c| c <= u).clamp(1, values.len()) - 1;
                let scale = (*level as f64).exp2();
                let x = i as f64 / scale + (u - cumulative[i]) / values[i];
                Ok(x.clamp(i as f64 / scale, (i + 1) as f64 / scale))
            }
            Repr::Linear { a, b } => {
                // a x + b x^2 / 2 = u, written to avoid cancellation.
                let disc = (a * a + 2.0 * b * u).max(0.0);
                Ok((2.0 * u / (a + disc.sqrt())).clamp(0.0, 1.0))
            }
            Repr::Fourier { .. } => self.fourier_quantile(u),
        }
    }

    fn fourier_quantile(&self, u: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut x = u;
        for _ in 0..200 {
            let r = self.cdf(x) - u;
            if r.abs() <= 1e-13 {
                return Ok(x);
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = x - r / self.pdf(x);
            x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                return Ok(x);
            }
        }
        Err(Error::RootFinding { target: u })
    }

    /// `count` i.i.d. draws from `f` by inversion, in draw order.
    pub fn draw_iid<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                let u: f64 = rng.random();
                // Keep the result inside the half-open unit interval.
                self.quantile(u).map(|x| x.min(1.0f64.next_down()))
            })
            .collect()
    }

    /// `count` i.i.d. draws, sorted ascending.
    pub fn sample_points<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        let mut points = self.draw_iid(count, rng)?;
        points.sort_by(f64::total_cmp);
        Ok(points)
    }

    /// Complex Fourier coefficient `c_n = int f e^{-2 pi i n x}`, `n >= 1`.
    pub fn fourier_coefficient(&self, n: u64) -> (f64, f64) {
        let w = 2.0 * PI * n as f64;
        match &self.repr {
            Repr::Fourier { coefficients } => {
                coefficients.get(n as usize - 1).copied().unwrap_or((0.0, 0.0))
            }
            // int x e^{-iwx} = i / w for integer n >= 1.
            Repr::Linear { b, .. } => (0.0, b / w),
            Repr::Steps { level, values, .. } => {
                let scale = (*level as f64).exp2();
                let (mut re, mut im) = (0.0, 0.0);
                for (i, v) in values.iter().enumerate() {
                    let (x0, x1) = (i as f64 / scale, (i + 1) as f64 / scale);
                    // int_{x0}^{x1} e^{-iwx} = (sin(w x1) - sin(w x0)) / w + i (cos(w x1) - cos(w x0)) / w
                    re += v * ((w * x1).sin() - (w * x0).sin()) / w;
                    im += v * ((w * x1).cos() - (w * x0).cos()) / w;
                }
                (re, im)
            }
        }
    }

    fn derivative_bounds(coefficients: &[(f64, f64)]) -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (n, &(re, im)) in coefficients.iter().enumerate() {
            let w = 2.0 * PI * (n + 1) as f64;
            let amp = 2.0 * re.hypot(im);
            d1 += amp * w;
            d2 += amp * w * w;
        }
        (d1, d2)
    }

    fn fourier_derivative(coefficients: &[(f64, f64)], x: f64) -> f64 {
        coefficients
            .iter()
            .enumerate()
            .map(|(n, &(re, im))| {
                let w = 2.0 * PI * (n + 1) as f64;
                let (sin, cos) = (w * x).sin_cos();
                -2.0 * w * (re * sin + im * cos)
            })
            .sum()
    }

    /// Lipschitz seminorm of order `beta` and Sobolev seminorm of order
    /// `alpha` (frequencies up to `n_max`).
    pub fn class_norms(&self, beta: f64, alpha: f64, n_max: u64) -> Result<ClassNorms> {
        if !(beta > 0.0 && beta <= 1.0 && alpha > 0.0) {
            return Err(Error::Domain(format!("beta={beta}, alpha={alpha}")));
        }
        let lipschitz = match &self.repr {
            Repr::Steps { values, .. } => {
                if values.iter().all(|&v| v == values[0]) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            // sup |b| |x - y|^{1 - beta} over [0, 1] is attained at |x - y| = 1.
            Repr::Linear { b, .. } => b.abs(),
            Repr::Fourier { coefficients } => {
                let (_, d2) = Self::derivative_bounds(coefficients);
                let m = 1usize << FOURIER_GRID_LEVEL;
                let h = 1.0 / m as f64;
                let grid_max = (0..m)
                    .map(|i| Self::fourier_derivative(coefficients, i as f64 * h).abs())
                    .fold(0.0, f64::max);
                let slope = grid_max + d2 * h / 2.0;
                if beta == 1.0 {
                    slope
                } else {
                    // |f(x) - f(y)| <= min(slope |x - y|, osc); maximize over
                    // the distance on a log grid of separations.
                    let osc = 2.0 * coefficients.iter().map(|c| 2.0 * c.0.hypot(c.1)).sum::<f64>();
                    (0..=40)
                        .map(|j| {
                            let d = (-(j as f64) * 0.5).exp2();
                            (slope * d).min(osc) / d.powf(beta)
                        })
                        .fold(0.0, f64::max)
                }
            }
        };
        let sobolev = (1..=n_max)
            .map(|n| {
                let (re, im) = self.fourier_coefficient(n);
                2.0 * (n as f64).powf(2.0 * alpha) * (re * re + im * im)
            })
            .sum();
        Ok(ClassNorms { lipschitz, sobolev })
    }
}

fn certified_fourier_minimum(repr: &Repr) -> f64 {
    let Repr::Fourier { coefficients } = repr else {
        unreachable!("fourier representation expected");
    };
    let (d1, _) = DensityModel::derivative_bounds(coefficients);
    let m = 1usize << FOURIER_GRID_LEVEL;
    let h = 1.0 / m as f64;
    let probe = DensityModel {
        spec: DensitySpec::new(FamilySpec::Uniform, 1.0),
        repr: repr.clone(),
        minimum: 0.0,
    };
    let grid_min = (0..m).map(|i| probe.pdf(i as f64 * h)).fold(f64::INFINITY, f64::min);
    // Any point is within h/2 of the grid.
    grid_min - d1 * h / 2.0
}

/// A Poisson-process observation: a random number of sorted points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProcessSample {
    pub count: usize,
    pub points: Vec<f64>,
}

impl PointProcessSample {
    /// Sorts the points and checks they lie in `[0, 1)`.
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if let Some(&x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::PointOutOfRange(x));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { count: points.len(), points })
    }

    pub fn empty() -> Self {
        Self { count: 0, points: Vec::new() }
    }
}

/// A fixed-size i.i.d. sample, in draw order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedSample {
    pub n: usize,
    pub points: Vec<f64>,
}

impl FixedSample {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("fixed sample must be nonempty".into()));
        }
        if let Some(&x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::PointOutOfRange(x));
        }
        Ok(Self { n: points.len(), points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(family: FamilySpec, eps0: f64) -> DensityModel {
        make_density(&DensitySpec::new(family, eps0)).unwrap()
    }

    fn linear() -> DensityModel {
        model(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5)
    }

    fn cosine() -> DensityModel {
        model(FamilySpec::Fourier { coefficients: vec![[1.0, 0.0], [0.1, 0.0]] }, 0.7)
    }

    fn idx(k: u32, l: u64) -> DyadicIndex {
        DyadicIndex::new(k, l).unwrap()
    }

    #[test]
    fn construction_checks() {
        linear();
        assert!(make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.0, b: 2.0 }, 0.01)).is_err());
        assert!(make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.6, b: 1.0 }, 0.1)).is_err());
        let c = cosine();
        assert!((c.minimum() - 0.8).abs() < 1e-4 && c.minimum() <= 0.8);
        assert!(make_density(&DensitySpec::new(
            FamilySpec::Fourier { coefficients: vec![[1.0, 0.0], [0.1, 0.0]] },
            0.81
        ))
        .is_err());
        assert!(make_density(&DensitySpec::new(
            FamilySpec::PiecewiseConstant { level: 1, values: vec![1.5, 0.5] },
            0.5
        ))
        .is_ok());
        assert!(make_density(&DensitySpec::new(
            FamilySpec::PiecewiseConstant { level: 1, values: vec![2.5, -0.5] },
            0.1
        ))
        .is_err());
    }

    #[test]
    fn spec_json_layout() {
        let spec: DensitySpec =
            serde_json::from_str(r#"{"family":"linear","params":{"a":0.5,"b":1.0},"eps0":0.5}"#)
                .unwrap();
        assert_eq!(spec.family, FamilySpec::Linear { a: 0.5, b: 1.0 });
        let spec: DensitySpec = serde_json::from_str(r#"{"family":"uniform","eps0":1.0}"#).unwrap();
        assert_eq!(spec.family, FamilySpec::Uniform);
        let bump = DensitySpec::new(
            FamilySpec::SingleHaarBump { level: 2, position: 1, amplitude: 0.1 },
            0.5,
        );
        let text = serde_json::to_string(&bump).unwrap();
        assert!(text.contains(r#""family":"single-haar-bump""#));
        assert_eq!(serde_json::from_str::<DensitySpec>(&text).unwrap(), bump);
    }

    #[test]
    fn cell_integrals() {
        let u = model(FamilySpec::Uniform, 1.0);
        assert_eq!(u.integrate_cell(idx(2, 0)), 0.25);
        assert!((linear().integrate_cell(idx(1, 0)) - 0.375).abs() < 1e-16);
        assert!((cosine().integrate_cell(idx(1, 0)) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn levels_sum_to_one() {
        let bump = model(FamilySpec::SingleHaarBump { level: 3, position: 2, amplitude: 0.1 }, 0.5);
        let pc = model(
            FamilySpec::PiecewiseConstant { level: 2, values: vec![0.5, 1.5, 1.25, 0.75] },
            0.5,
        );
        for f in [linear(), cosine(), bump, pc] {
            for k in [0, 1, 5, 12] {
                let s: f64 = DyadicIndex::level_iter(k).map(|i| f.integrate_cell(i)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sqrt_means() {
        let f = linear();
        let root = idx(0, 0);
        assert!((f.cell_mean(root) - 1.0).abs() < 1e-16);
        // Closed-form antiderivative of sqrt(1/2 + x).
        let exact = 2.0 / 3.0 * (1.5f64.powf(1.5) - 0.5f64.powf(1.5));
        assert!((f.sqrt_cell_mean(root).unwrap() - exact).abs() < 1e-13);
        let gap = f.jensen_gap(root).unwrap();
        assert!((gap - (1.0 - exact)).abs() < 1e-13);
        assert!((gap - 0.010_957_389).abs() < 1e-9);
        let u = model(FamilySpec::Uniform, 1.0);
        assert_eq!(u.sqrt_cell_mean(idx(3, 2)).unwrap(), 1.0);
    }

    #[test]
    fn split_probabilities() {
        let f = linear();
        assert!((f.split_probability(idx(0, 0)) - 0.375).abs() < 1e-16);
        let theta = f.haar_coefficient(idx(0, 0));
        assert!((f.split_probability(idx(0, 0)) - 0.5 - theta / 2.0).abs() < 1e-16);
        let u = model(FamilySpec::Uniform, 1.0);
        assert_eq!(u.split_probability(idx(4, 3)), 0.5);
    }

    #[test]
    fn sqrt_haar_matches_direct_quadrature() {
        for f in [linear(), cosine()] {
            for i in [idx(0, 0), idx(3, 5), idx(6, 40)] {
                let (a, b) = i.cell();
                let c = i.midpoint();
                let tol = Tolerance::new(0.0, 1e-13);
                let l = quad::integrate(|x| f.pdf(x).sqrt(), a, c, tol).unwrap().value;
                let r = quad::integrate(|x| f.pdf(x).sqrt(), c, b, tol).unwrap().value;
                let direct = (0.5 * i.level as f64).exp2() * (l - r);
                let got = f.sqrt_haar_coefficient(i).unwrap();
                assert!((got - direct).abs() < 1e-15, "{got} vs {direct}");
            }
        }
    }

    #[test]
    fn quantiles() {
        let f = linear();
        assert!((f.quantile(0.375).unwrap() - 0.5).abs() < 1e-15);
        let u = model(FamilySpec::Uniform, 1.0);
        assert_eq!(u.quantile(0.3).unwrap(), 0.3);
        let c = cosine();
        for p in [0.01, 0.3, 0.77] {
            let x = c.quantile(p).unwrap();
            assert!((c.cdf(x) - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn empirical_cdf_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        for f in [linear(), cosine()] {
            let pts = f.sample_points(n, &mut rng).unwrap();
            let ks = pts
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let fx = f.cdf(x);
                    (fx - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - fx).abs())
                })
                .fold(0.0, f64::max);
            assert!(ks < 1.5 * 3.0 / (n as f64).sqrt(), "ks={ks}");
        }
        assert!(linear().sample_points(0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn sinc_gap_series_meets_direct_form() {
        for t in [0.3162, 0.3163, 0.5] {
            let direct = 1.0 - f64::sin(t) / t;
            assert!((one_minus_sinc(t) - direct).abs() < 1e-15);
        }
        assert_eq!(one_minus_sinc(0.0), 0.0);
        assert!((one_minus_sinc(1e-4) - (1e-8 / 6.0 - 1e-16 / 120.0)).abs() < 1e-24);
    }

    #[test]
    fn jensen_gap_small_amplitude_deep_cell() {
        // For a nearly flat cell the gap is int d^2 / (8 m^{3/2}) to leading order.
        let f = model(FamilySpec::Fourier { coefficients: vec![[1.0, 0.0], [0.0007, 0.0]] }, 0.99);
        let idx = DyadicIndex::new(9, 0).unwrap();
        let gap = f.jensen_gap(idx).unwrap();
        let mean = f.cell_mean(idx);
        let approx = f.cell_variation(idx).unwrap() / idx.width() / (8.0 * mean.powf(1.5));
        assert!(gap > 0.0);
        assert!((gap / approx - 1.0).abs() < 1e-6);
    }

    #[test]
    fn norms() {
        let u = model(FamilySpec::Uniform, 1.0);
        let flat = u.class_norms(1.0, 1.0, 10).unwrap();
        assert_eq!(flat.lipschitz, 0.0);
        assert!(flat.sobolev < 1e-25);
        assert_eq!(linear().class_norms(1.0, 1.0, 4).unwrap().lipschitz, 1.0);
        let c = cosine().class_norms(1.0, 1.0, 10).unwrap();
        assert!((c.sobolev - 0.02).abs() < 1e-16);
        assert!((c.lipschitz - 0.4 * PI).abs() < 1e-3);
        // Coefficients are int f(x) e^{-2 pi i n x} dx; check against direct quadrature.
        let (re, im) = linear().fourier_coefficient(3);
        let oracle_im =
            quad::integrate(|x| (0.5 + x) * (2.0 * PI * 3.0 * x).sin(), 0.0, 1.0, Tolerance::default())
                .unwrap()
                .value;
        assert!(re.abs() < 1e-16 && (im + oracle_im).abs() < 1e-12);
    }

    #[test]
    fn samples_validate() {
        assert!(PointProcessSample::new(vec![0.3, 1.0]).is_err());
        let s = PointProcessSample::new(vec![0.7, 0.1]).unwrap();
        assert_eq!(s.points, vec![0.1, 0.7]);
        assert!(FixedSample::new(vec![]).is_err());
    }
}

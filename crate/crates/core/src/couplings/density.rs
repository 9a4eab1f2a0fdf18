//! Exact densities of the transformed scalar variables.

use serde::{Deserialize, Serialize};

use crate::couplings::binomial::FmTable;
use crate::couplings::normal::{normal_quantile, normal_quantile_ln};
use crate::couplings::root_transform;
use crate::error::{Error, Result};
use crate::special::{ln_binom_pmf, ln_poisson_pmf, normal_pdf};

/// Poisson masses below this are dropped; the dropped total is reported.
const POISSON_CUTOFF: f64 = 1e-30;

/// A density on the real line that is smooth between known knots.
pub trait PiecewiseDensity {
    fn pdf(&self, x: f64) -> f64;

    /// An interval outside of which at most `tail` mass lies.
    fn support(&self, tail: f64) -> (f64, f64);

    /// Points in `(a, b)` at which the density is not smooth.
    fn knots_in(&self, a: f64, b: f64) -> Vec<f64>;

    /// Mass the representation omits (truncated pieces).
    fn tail_mass(&self) -> f64 {
        0.0
    }
}

/// `N(mean, sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl Gaussian {
    pub fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }

    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }
}

impl PiecewiseDensity for Gaussian {
    fn pdf(&self, x: f64) -> f64 {
        normal_pdf((x - self.mean) / self.sd) / self.sd
    }

    fn support(&self, tail: f64) -> (f64, f64) {
        let z = -normal_quantile(0.5 * tail).value;
        (self.mean - z * self.sd, self.mean + z * self.sd)
    }

    fn knots_in(&self, _a: f64, _b: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Which transformed variable a [`CouplingDensity`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `t(X + U)` with `X ~ Poisson(lambda)`.
    PoissonRoot { lambda: f64 },
    /// `2 sqrt(X + U + 1/2)` with `X ~ Poisson(lambda)`.
    PoissonRootShifted { lambda: f64 },
    /// `Phi^{-1}(F_m(X + U))` with `X ~ Binomial(m, p)`.
    BinomialCoupled { m: u64, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `c |y|`.
    Ramp(f64),
    /// `c phi(y)`.
    ScaledNormal(f64),
}

impl Shape {
    #[inline]
    fn eval(self, y: f64) -> f64 {
        match self {
            Shape::Ramp(c) => c * y.abs(),
            Shape::ScaledNormal(c) => c * normal_pdf(y),
        }
    }
}

/// Exact piecewise density of a transformed Poisson or coupled binomial
/// variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDensity {
    kind: CouplingKind,
    /// Piece `i` is `[edges[i], edges[i + 1])`; the outer edges may be infinite.
    edges: Vec<f64>,
    shapes: Vec<Shape>,
    /// Mass of each piece.
    masses: Vec<f64>,
    omitted: f64,
}

fn poisson_range(lambda: f64) -> (u64, u64, Vec<f64>) {
    let mode = lambda.floor() as u64;
    let mut lo = mode;
    while lo > 0 && ln_poisson_pmf(lo - 1, lambda).exp() >= POISSON_CUTOFF {
        lo -= 1;
    }
    let mut hi = mode;
    while ln_poisson_pmf(hi + 1, lambda).exp() >= POISSON_CUTOFF {
        hi += 1;
    }
    let masses = (lo..=hi).map(|j| ln_poisson_pmf(j, lambda).exp()).collect();
    (lo, hi, masses)
}

/// Poisson mass outside `lo..=hi`, summed term by term so that it is
/// accurate far below the round-off of `1 - sum`.
fn poisson_outside(lo: u64, hi: u64, lambda: f64) -> f64 {
    let mut total = 0.0;
    // Both tails decrease away from the mode, so stop once a term no longer
    // changes the running sum.
    for j in (0..lo).rev() {
        let w = ln_poisson_pmf(j, lambda).exp();
        total += w;
        if w <= total * 1e-17 {
            break;
        }
    }
    let mut j = hi + 1;
    loop {
        let w = ln_poisson_pmf(j, lambda).exp();
        total += w;
        if w <= total * 1e-17 || w == 0.0 {
            return total;
        }
        j += 1;
    }
}

/// Density of `t(X + U)` (or of `2 sqrt(X + U + 1/2)` when `shifted`) for
/// `X ~ Poisson(lambda)` and independent `U` uniform on `[-1/2, 1/2)`.
pub fn poisson_root_density(lambda: f64, shifted: bool) -> Result<CouplingDensity> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("poisson mean {lambda}")));
    }
    let (lo, hi, pmf) = poisson_range(lambda);
    let mut edges = Vec::with_capacity(pmf.len() + 2);
    let mut shapes = Vec::with_capacity(pmf.len() + 1);
    let mut masses = Vec::with_capacity(pmf.len() + 1);
    for (j, &p) in (lo..=hi).zip(&pmf) {
        let c = 0.5 * p;
        if shifted {
            if edges.is_empty() {
                edges.push(2.0 * (j as f64).sqrt());
            }
            edges.push(2.0 * (j as f64 + 1.0).sqrt());
            shapes.push(Shape::Ramp(c));
            masses.push(p);
        } else if j == 0 {
            // t maps [-1/2, 1/2) onto [-sqrt 2, sqrt 2); the ramp |y| has a
            // kink at 0, so split there.
            edges.extend([root_transform(-0.5), 0.0, root_transform(0.5)]);
            shapes.extend([Shape::Ramp(c), Shape::Ramp(c)]);
            masses.extend([0.5 * p, 0.5 * p]);
        } else {
            if edges.is_empty() {
                edges.push(root_transform(j as f64 - 0.5));
            }
            edges.push(root_transform(j as f64 + 0.5));
            shapes.push(Shape::Ramp(c));
            masses.push(p);
        }
    }
    let omitted = poisson_outside(lo, hi, lambda);
    let kind = if shifted {
        CouplingKind::PoissonRootShifted { lambda }
    } else {
        CouplingKind::PoissonRoot { lambda }
    };
    Ok(CouplingDensity { kind, edges, shapes, masses, omitted })
}

/// Density of `Phi^{-1}(F_m(X + U))` for `X ~ Binomial(m, p)`: on piece `j`
/// it is `(2p)^j (2 - 2p)^{m - j} phi(z)`.
pub fn binomial_coupled_density(m: u64, p: f64) -> Result<CouplingDensity> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("binomial probability {p} outside (0, 1)")));
    }
    binomial_coupled_with(&FmTable::new(m), p)
}

/// As [`binomial_coupled_density`] with a prebuilt `F_m` table.
pub fn binomial_coupled_with(table: &FmTable, p: f64) -> Result<CouplingDensity> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("binomial probability {p} outside (0, 1)")));
    }
    let m = table.m();
    let mut edges = Vec::with_capacity(m as usize + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend((1..=m).map(|j| table.boundary(j)));
    edges.push(f64::INFINITY);
    let up = (2.0 * p - 1.0).ln_1p();
    let down = (1.0 - 2.0 * p).ln_1p();
    let shapes = (0..=m)
        .map(|j| Shape::ScaledNormal((j as f64 * up + (m - j) as f64 * down).exp()))
        .collect();
    let q = 1.0 - p;
    let masses = (0..=m).map(|j| ln_binom_pmf(j, m, p, q).exp()).collect();
    Ok(CouplingDensity {
        kind: CouplingKind::BinomialCoupled { m, p },
        edges,
        shapes,
        masses,
        omitted: 0.0,
    })
}

impl CouplingDensity {
    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    /// Interior piece boundaries, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.edges.iter().copied().filter(|e| e.is_finite()).collect()
    }

    pub fn piece_count(&self) -> usize {
        self.shapes.len()
    }

    /// `(start, end)` of piece `i`.
    pub fn piece(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    /// Probability carried by piece `i`.
    pub fn piece_mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    fn piece_index(&self, y: f64) -> Option<usize> {
        if !(y >= self.edges[0] && y < *self.edges.last().expect("edges")) {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= y) - 1)
    }
}

impl PiecewiseDensity for CouplingDensity {
    fn pdf(&self, y: f64) -> f64 {
        self.piece_index(y).map_or(0.0, |i| self.shapes[i].eval(y))
    }

    fn support(&self, tail: f64) -> (f64, f64) {
        let n = self.masses.len();
        let half = 0.5 * tail;
        let mut lo_piece = 0;
        let mut acc = 0.0;
        while lo_piece + 1 < n && acc + self.masses[lo_piece] <= half {
            acc += self.masses[lo_piece];
            lo_piece += 1;
        }
        let mut hi_piece = n - 1;
        acc = 0.0;
        while hi_piece > lo_piece && acc + self.masses[hi_piece] <= half {
            acc += self.masses[hi_piece];
            hi_piece -= 1;
        }
        let mut lo = self.edges[lo_piece];
        let mut hi = self.edges[hi_piece + 1];
        // Infinite outer pieces are scaled normals: cut their tails.
        if lo == f64::NEG_INFINITY {
            if let Shape::ScaledNormal(c) = self.shapes[0] {
                let ln_level = (half.ln() - c.ln()).min(-std::f64::consts::LN_2);
                lo = normal_quantile_ln(ln_level).min(self.edges[1].min(0.0));
            }
        }
        if hi == f64::INFINITY {
            if let Shape::ScaledNormal(c) = self.shapes[n - 1] {
                let ln_level = (half.ln() - c.ln()).min(-std::f64::consts::LN_2);
                hi = (-normal_quantile_ln(ln_level)).max(self.edges[n - 1].max(0.0));
            }
        }
        (lo, hi)
    }

    fn knots_in(&self, a: f64, b: f64) -> Vec<f64> {
        let start = self.edges.partition_point(|&e| e <= a);
        self.edges[start..].iter().copied().take_while(|&e| e < b).collect()
    }

    fn tail_mass(&self) -> f64 {
        self.omitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::normal::normal_cdf;
    use crate::quad::{integrate_segments, Tolerance};
    use crate::special::binom_pmf;

    fn total_mass<D: PiecewiseDensity>(d: &D) -> f64 {
        let (a, b) = d.support(1e-20);
        let mut pts = vec![a];
        pts.extend(d.knots_in(a, b));
        pts.push(b);
        integrate_segments(|x| d.pdf(x), &pts, Tolerance::new(1e-300, 1e-12)).unwrap()
    }

    #[test]
    fn poisson_root_integrates_to_one() {
        for lambda in [0.5, 5.0, 50.0] {
            for shifted in [false, true] {
                let d = poisson_root_density(lambda, shifted).unwrap();
                assert!((total_mass(&d) - 1.0).abs() < 1e-10, "lambda={lambda}");
                assert!(d.tail_mass() < 1e-20);
            }
        }
    }

    #[test]
    fn poisson_root_first_piece() {
        let lambda: f64 = 3.0;
        let d = poisson_root_density(lambda, false).unwrap();
        for y in [0.1, 0.7, 1.4] {
            assert!((d.pdf(y) - (-lambda).exp() * y / 2.0).abs() < 1e-16);
        }
        assert_eq!(d.pdf(-1.5), 0.0);
    }

    #[test]
    fn poisson_root_mean() {
        let d = poisson_root_density(50.0, false).unwrap();
        let (a, b) = d.support(1e-20);
        let mut pts = vec![a];
        pts.extend(d.knots_in(a, b));
        pts.push(b);
        let mean = integrate_segments(|x| x * d.pdf(x), &pts, Tolerance::new(1e-300, 1e-12)).unwrap();
        // E t(j + U) = (4/3)((j + 1/2)^{3/2} - (j - 1/2)^{3/2}) for j >= 1 and 0 for j = 0.
        let mut p = (-50.0f64).exp();
        let mut oracle = 0.0;
        for j in 1..400 {
            p *= 50.0 / j as f64;
            let jf = j as f64;
            oracle += p * 4.0 / 3.0 * ((jf + 0.5).powf(1.5) - (jf - 0.5).powf(1.5));
        }
        assert!((mean - oracle).abs() < 1e-9, "{mean} vs {oracle}");
    }

    #[test]
    fn binomial_at_half_is_standard_normal() {
        for m in [0u64, 1, 7, 64] {
            let d = binomial_coupled_density(m, 0.5).unwrap();
            for i in 0..=200 {
                let z = -10.0 + 0.1 * i as f64;
                assert_eq!(d.pdf(z), normal_pdf(z));
            }
        }
        let d = binomial_coupled_density(0, 0.3).unwrap();
        assert_eq!(d.pdf(0.4), normal_pdf(0.4));
        assert_eq!(d.piece_count(), 1);
    }

    fn normal_interval_mass(a: f64, b: f64) -> f64 {
        if a >= 0.0 {
            normal_cdf(-a) - normal_cdf(-b)
        } else if b <= 0.0 {
            normal_cdf(b) - normal_cdf(a)
        } else {
            1.0 - normal_cdf(a) - normal_cdf(-b)
        }
    }

    #[test]
    fn binomial_piece_masses() {
        for (m, p) in [(5u64, 0.3), (64, 0.45)] {
            let d = binomial_coupled_density(m, p).unwrap();
            assert_eq!(d.piece_count() as u64, m + 1);
            assert!((total_mass(&d) - 1.0).abs() < 1e-10);
            for j in 0..=m as usize {
                let (a, b) = d.piece(j);
                let Shape::ScaledNormal(c) = d.shapes[j] else { unreachable!() };
                let mass = c * normal_interval_mass(a, b);
                let oracle = binom_pmf(j as u64, m, p);
                assert!((mass - oracle).abs() <= 1e-12 * oracle.max(1e-300) + 1e-300, "j={j}");
            }
        }
    }

    #[test]
    fn gaussian_support() {
        let g = Gaussian::new(2.0, 0.5);
        let (a, b) = g.support(1e-10);
        assert!((normal_cdf((a - 2.0) / 0.5) - 0.5e-10).abs() < 1e-20);
        assert!((b + a - 4.0).abs() < 1e-12);
    }
}

//! The forward map `T_n` from dithered counts to Gaussian-like coefficients
//! and its deterministic inverse.

use serde::{Deserialize, Serialize};

use crate::couplings::{root_transform, root_transform_inverse, FmCache};
use crate::error::{Error, Result};
use crate::rng::DitherStream;
use crate::transforms::pyramid::{check_levels, CountPyramid};

/// Base increments at level `k0` and detail coefficients `W_{k,2l}` for
/// `k0 < k <= k1` (the odd positions are their negations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStack {
    pub n: u64,
    pub k0: u32,
    pub k1: u32,
    pub base: Vec<f64>,
    /// `details[k - k0 - 1]` has `2^{k-1}` entries.
    pub details: Vec<Vec<f64>>,
    /// `sigma[k - k0] = sqrt(2^k / (4n))`.
    pub sigma: Vec<f64>,
}

/// `sigma_k = sqrt(2^k / (4n))`.
pub fn sigma(k: u32, n: u64) -> f64 {
    ((k as f64).exp2() / (4.0 * n as f64)).sqrt()
}

impl CoefficientStack {
    pub fn sigma_at(&self, k: u32) -> f64 {
        self.sigma[(k - self.k0) as usize]
    }

    pub fn level(&self, k: u32) -> &[f64] {
        &self.details[(k - self.k0 - 1) as usize]
    }

    pub fn validate(&self) -> Result<()> {
        check_levels(self.k0, self.k1)?;
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let ok = self.base.len() == 1usize << self.k0
            && self.details.len() == (self.k1 - self.k0) as usize
            && self.sigma.len() == (self.k1 - self.k0 + 1) as usize
            && self
                .details
                .iter()
                .enumerate()
                .all(|(i, d)| d.len() == 1usize << (self.k0 + i as u32));
        if !ok {
            return Err(Error::InvalidInput("coefficient stack has inconsistent shapes".into()));
        }
        Ok(())
    }
}

/// Counts of values that needed special handling during a map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDiagnostics {
    /// Quantile arguments clamped or non-finite.
    pub saturated: usize,
    /// Negative rounded counts replaced by zero.
    pub clamped: usize,
}

impl MapDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.saturated == 0 && self.clamped == 0
    }
}

/// `N - 1/2 + r`, kept strictly below `N + 1/2`.
#[inline]
fn dithered(count: u64, r: f64) -> f64 {
    let x = (count as f64 - 0.5) + r;
    let top = count as f64 + 0.5;
    if x >= top {
        top.next_down()
    } else {
        x
    }
}

/// Nearest integer with ties rounded up, clamped to zero from below.
fn round_count(x: f64, diag: &mut MapDiagnostics) -> u64 {
    if !x.is_finite() {
        diag.saturated += 1;
        return 0;
    }
    let r = (x + 0.5).floor();
    if r < 0.0 {
        diag.clamped += 1;
        0
    } else {
        r as u64
    }
}

/// Forward and inverse maps sharing a cache of `F_m` tables.
#[derive(Debug, Default)]
pub struct Mapper {
    cache: FmCache,
}

impl Mapper {
    pub fn new() -> Self {
        Self::default()
    }

    /// `T_n`: root transform of dithered base counts and quantile-coupled
    /// splits at every finer level.
    pub fn forward(
        &mut self,
        pyramid: &CountPyramid,
        dither: &DitherStream,
        n: u64,
    ) -> Result<(CoefficientStack, MapDiagnostics)> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        pyramid.validate()?;
        let (k0, k1) = (pyramid.k0, pyramid.k1);
        let sigma: Vec<f64> = (k0..=k1).map(|k| sigma(k, n)).collect();
        let mut diag = MapDiagnostics::default();

        let mut offsets = vec![0.0; 1usize << k0];
        dither.fill_offsets(k0, &mut offsets);
        let base = pyramid
            .level(k0)
            .iter()
            .zip(&offsets)
            .map(|(&c, &r)| sigma[0] * root_transform(dithered(c, r)))
            .collect();

        let mut details = Vec::with_capacity((k1 - k0) as usize);
        for k in k0 + 1..=k1 {
            let parents = pyramid.level(k - 1);
            let children = pyramid.level(k);
            let mut offsets = vec![0.0; 1usize << k];
            dither.fill_offsets(k, &mut offsets);
            let s = sigma[(k - 1 - k0) as usize];
            let row = parents
                .iter()
                .enumerate()
                .map(|(l, &m)| {
                    let q = self.cache.get(m).coupled_normal(children[2 * l], offsets[2 * l]);
                    diag.saturated += q.saturated as usize;
                    s * q.value
                })
                .collect();
            details.push(row);
        }
        Ok((CoefficientStack { n, k0, k1, base, details, sigma }, diag))
    }

    /// `T_n^{-1}`: recovers the count pyramid.
    pub fn inverse(&mut self, stack: &CoefficientStack) -> Result<(CountPyramid, MapDiagnostics)> {
        stack.validate()?;
        let (k0, k1) = (stack.k0, stack.k1);
        let mut diag = MapDiagnostics::default();
        let s0 = stack.sigma[0];
        let mut counts: Vec<Vec<u64>> = Vec::with_capacity((k1 - k0 + 1) as usize);
        counts.push(
            stack
                .base
                .iter()
                .map(|&v| round_count(root_transform_inverse(v / s0), &mut diag))
                .collect(),
        );
        for k in k0 + 1..=k1 {
            let s = stack.sigma[(k - 1 - k0) as usize];
            let parents = counts.last().expect("nonempty");
            let mut row = Vec::with_capacity(1usize << k);
            for (&m, &w) in parents.iter().zip(stack.level(k)) {
                let z = w / s;
                let j = if z.is_finite() {
                    self.cache.get(m).invert_normal(z).0
                } else {
                    diag.saturated += 1;
                    if z > 0.0 { m } else { 0 }
                };
                row.push(j);
                row.push(m - j);
            }
            counts.push(row);
        }
        Ok((CountPyramid { k0, k1, counts }, diag))
    }
}

/// `T_n` with a fresh table cache.
pub fn forward_map(
    pyramid: &CountPyramid,
    dither: &DitherStream,
    n: u64,
) -> Result<(CoefficientStack, MapDiagnostics)> {
    Mapper::new().forward(pyramid, dither, n)
}

/// `T_n^{-1}` with a fresh table cache.
pub fn inverse_map(stack: &CoefficientStack) -> Result<(CountPyramid, MapDiagnostics)> {
    Mapper::new().inverse(stack)
}

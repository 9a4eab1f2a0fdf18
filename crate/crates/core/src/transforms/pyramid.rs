//! Dyadic count pyramids.

use serde::{Deserialize, Serialize};

use crate::density::PointProcessSample;
use crate::error::{Error, Result};

/// Counts `N_{k,l}` for every level `k0 <= k <= k1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPyramid {
    pub k0: u32,
    pub k1: u32,
    /// `counts[k - k0][l]`.
    pub counts: Vec<Vec<u64>>,
}

/// Largest level the transforms accept (2^30 finest cells).
pub const MAX_PYRAMID_LEVEL: u32 = 30;

pub(crate) fn check_levels(k0: u32, k1: u32) -> Result<()> {
    if k0 > k1 || k1 > MAX_PYRAMID_LEVEL {
        return Err(Error::InvalidInput(format!("levels k0={k0}, k1={k1}")));
    }
    Ok(())
}

impl CountPyramid {
    /// Builds the coarser levels from finest-level counts by sibling sums.
    pub fn from_finest(k0: u32, k1: u32, finest: Vec<u64>) -> Result<Self> {
        check_levels(k0, k1)?;
        if finest.len() != 1usize << k1 {
            return Err(Error::InvalidInput(format!(
                "level {k1} needs {} counts, got {}",
                1u64 << k1,
                finest.len()
            )));
        }
        let mut counts = vec![finest];
        for _ in k0..k1 {
            let prev = counts.last().expect("nonempty");
            let next = prev.chunks_exact(2).map(|c| c[0] + c[1]).collect();
            counts.push(next);
        }
        counts.reverse();
        Ok(Self { k0, k1, counts })
    }

    pub fn zeros(k0: u32, k1: u32) -> Result<Self> {
        check_levels(k0, k1)?;
        Self::from_finest(k0, k1, vec![0; 1usize << k1])
    }

    /// Counts at level `k`.
    pub fn level(&self, k: u32) -> &[u64] {
        &self.counts[(k - self.k0) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts[0].iter().sum()
    }

    /// Checks shapes and the sibling-sum identity.
    pub fn validate(&self) -> Result<()> {
        check_levels(self.k0, self.k1)?;
        if self.counts.len() != (self.k1 - self.k0 + 1) as usize {
            return Err(Error::InvalidInput("pyramid has the wrong number of levels".into()));
        }
        for (i, row) in self.counts.iter().enumerate() {
            if row.len() != 1usize << (self.k0 + i as u32) {
                return Err(Error::InvalidInput(format!("pyramid level {} has length {}", self.k0 + i as u32, row.len())));
            }
        }
        for w in self.counts.windows(2) {
            for (l, &parent) in w[0].iter().enumerate() {
                if parent != w[1][2 * l] + w[1][2 * l + 1] {
                    return Err(Error::InvalidInput(format!("pyramid sibling sums break at cell {l}")));
                }
            }
        }
        Ok(())
    }
}

/// Bins a point sample at level `k1` and sums upwards to `k0`.
pub fn count_pyramid(sample: &PointProcessSample, k0: u32, k1: u32) -> Result<CountPyramid> {
    check_levels(k0, k1)?;
    let cells = 1usize << k1;
    let mut finest = vec![0u64; cells];
    for &x in &sample.points {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::PointOutOfRange(x));
        }
        // Scaling by a power of two is exact, so half-open cells are respected.
        finest[((x * cells as f64) as usize).min(cells - 1)] += 1;
    }
    CountPyramid::from_finest(k0, k1, finest)
}

/// Places `N_{k1,l}` points evenly inside each finest cell, at
/// `(l + (i + 1/2) / N) / 2^{k1}`.
pub fn pyramid_to_points(pyramid: &CountPyramid) -> PointProcessSample {
    let finest = pyramid.level(pyramid.k1);
    let w = (-(pyramid.k1 as f64)).exp2();
    let mut points = Vec::with_capacity(pyramid.total() as usize);
    for (l, &n) in finest.iter().enumerate() {
        for i in 0..n {
            points.push((l as f64 + (i as f64 + 0.5) / n as f64) * w);
        }
    }
    PointProcessSample { count: points.len(), points }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let empty = count_pyramid(&PointProcessSample::empty(), 0, 3).unwrap();
        assert!(empty.counts.iter().flatten().all(|&c| c == 0));

        let s = PointProcessSample::new(vec![0.1, 0.6, 0.7]).unwrap();
        let p = count_pyramid(&s, 0, 1).unwrap();
        assert_eq!(p.level(1), &[1, 2]);
        assert_eq!(p.level(0), &[3]);

        let half = PointProcessSample::new(vec![0.5]).unwrap();
        assert_eq!(count_pyramid(&half, 1, 1).unwrap().level(1), &[0, 1]);
        assert!(count_pyramid(&s, 2, 1).is_err());
    }

    #[test]
    fn validation_and_points() {
        let s = PointProcessSample::new(vec![0.01, 0.02, 0.3, 0.99]).unwrap();
        let p = count_pyramid(&s, 1, 4).unwrap();
        p.validate().unwrap();
        let mut bad = p.clone();
        bad.counts[0][0] += 1;
        assert!(bad.validate().is_err());
        let placed = pyramid_to_points(&p);
        assert_eq!(count_pyramid(&placed, 1, 4).unwrap(), p);
    }
}

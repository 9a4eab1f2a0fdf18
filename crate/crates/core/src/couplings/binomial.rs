//! The dithered symmetric binomial distribution `F_m` and its coupling to
//! the standard normal.
//!
//! `F_m` is the law of `X + U` with `X ~ Binomial(m, 1/2)` and `U` uniform
//! on `[-1/2, 1/2)`. A point `x = j - 1/2 + r` with `r in [0, 1)` is handled
//! as the pair `(j, r)`, which is exactly how the transforms produce it, so
//! no precision is lost forming `j + U`. Points below `m/2` are coupled
//! through the lower tail and points above through the upper tail, which
//! makes the coupling exactly odd about `m/2`.

use std::collections::HashMap;

use crate::couplings::normal::{ln_normal_cdf, normal_cdf, normal_quantile, normal_quantile_ln, Quantile};
use crate::error::{Error, Result};
use crate::special::ln_binom_pmf;

/// Below this a tail probability is handled in the log domain.
const LINEAR_FLOOR: f64 = 1e-280;

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Precomputed masses and lower tail sums for one `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FmTable {
    m: u64,
    pmf: Vec<f64>,
    ln_pmf: Vec<f64>,
    /// `P(X <= j)` for `2j < m`, summed smallest term first.
    lower: Vec<f64>,
}

impl FmTable {
    pub fn new(m: u64) -> Self {
        let len = (m + 1) as usize;
        let mut ln_pmf = vec![0.0; len];
        for j in 0..=m / 2 {
            let v = ln_binom_pmf(j, m, 0.5, 0.5);
            ln_pmf[j as usize] = v;
            ln_pmf[(m - j) as usize] = v;
        }
        let pmf: Vec<f64> = ln_pmf.iter().map(|v| v.exp()).collect();
        let half = m.div_ceil(2) as usize;
        let mut lower = Vec::with_capacity(half);
        let mut acc = 0.0;
        for p in &pmf[..half] {
            acc += p;
            lower.push(acc);
        }
        Self { m, pmf, ln_pmf, lower }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `P(X = j)`.
    pub fn pmf(&self, j: u64) -> f64 {
        self.pmf.get(j as usize).copied().unwrap_or(0.0)
    }

    /// `P(X <= j)`.
    pub fn lower_tail(&self, j: i64) -> f64 {
        let m = self.m as i64;
        if j < 0 {
            0.0
        } else if j >= m {
            1.0
        } else if 2 * j < m {
            self.lower[j as usize]
        } else {
            1.0 - self.lower[(m - j - 1) as usize]
        }
    }

    /// `P(X > j)`.
    pub fn upper_tail(&self, j: i64) -> f64 {
        self.lower_tail(self.m as i64 - j - 1)
    }

    /// `ln P(X <= j)`, accurate when the probability underflows.
    pub fn ln_lower_tail(&self, j: i64) -> f64 {
        let m = self.m as i64;
        if j < 0 {
            return f64::NEG_INFINITY;
        }
        if j >= m {
            return 0.0;
        }
        if 2 * j >= m {
            return (-self.lower[(m - j - 1) as usize]).ln_1p();
        }
        let s = self.lower[j as usize];
        if s >= LINEAR_FLOOR {
            return s.ln();
        }
        // Deep lower tail: masses fall off geometrically towards 0.
        let top = self.ln_pmf[j as usize];
        let mut acc = 0.0;
        for i in (0..j as usize).rev() {
            let t = (self.ln_pmf[i] - top).exp();
            acc += t;
            if t < 1e-18 * acc {
                break;
            }
        }
        top + acc.ln_1p()
    }

    /// `F_m(j - 1/2 + r)` for `0 <= r <= 1`.
    pub fn cdf_at(&self, j: u64, r: f64) -> f64 {
        self.lower_tail(j as i64 - 1) + self.pmf(j) * r
    }

    /// `F_m(x)` for real `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x < -0.5 {
            return 0.0;
        }
        if x >= self.m as f64 + 0.5 {
            return 1.0;
        }
        let twice = 2.0 * x;
        let m = self.m as f64;
        if twice == m {
            return 0.5;
        }
        let j = (x + 0.5).floor();
        let r = x + 0.5 - j;
        let j = j as u64;
        if twice < m {
            self.cdf_at(j, r)
        } else {
            1.0 - (self.upper_tail(j as i64) + self.pmf(j) * (1.0 - r))
        }
    }

    /// `Phi^{-1}(F_m(j - 1/2 + r))`, computed through the nearer tail.
    pub fn coupled_normal(&self, j: u64, r: f64) -> Quantile {
        let twice = 2.0 * j as f64 - 1.0 + 2.0 * r;
        let m = self.m as f64;
        if twice == m {
            return Quantile { value: 0.0, saturated: false };
        }
        let (mut lower_index, mut weight, sign) = if twice < m {
            (j as i64 - 1, r, 1.0)
        } else {
            // Mirror: upper tail at x equals the lower tail at m - x.
            (self.m as i64 - j as i64 - 1, 1.0 - r, -1.0)
        };
        if weight == 1.0 {
            // A full piece is the next cumulative tail; using it keeps
            // boundaries reached from either side bitwise equal.
            lower_index += 1;
            weight = 0.0;
        }
        if weight == 0.0 {
            let tail = self.lower_tail(lower_index);
            let q = if tail >= LINEAR_FLOOR {
                normal_quantile(tail)
            } else {
                let value = normal_quantile_ln(self.ln_lower_tail(lower_index));
                Quantile { value, saturated: !value.is_finite() }
            };
            return Quantile { value: sign * q.value, saturated: q.saturated };
        }
        let tail = self.lower_tail(lower_index) + self.pmf(j) * weight;
        let q = if tail >= LINEAR_FLOOR {
            normal_quantile(tail)
        } else {
            let ln_tail = log_add_exp(self.ln_lower_tail(lower_index), self.ln_pmf[j as usize] + weight.ln());
            let value = normal_quantile_ln(ln_tail);
            Quantile { value, saturated: !value.is_finite() }
        };
        Quantile { value: sign * q.value, saturated: q.saturated }
    }

    /// Boundary `z_j = Phi^{-1}(F_m(j - 1/2))` between coupling pieces `j - 1`
    /// and `j`, for `1 <= j <= m`.
    pub fn boundary(&self, j: u64) -> f64 {
        self.coupled_normal(j, 0.0).value
    }

    /// Solves `F_m(j - 1/2 + r) = u` for `u < 1/2`, given `u` linearly or,
    /// when it underflows, through `ln u`.
    fn locate_lower(&self, u: f64, ln_u: f64) -> (u64, f64) {
        let linear = u >= LINEAR_FLOOR;
        // Smallest j in [0, m] with P(X <= j) > u.
        let (mut lo, mut hi) = (0u64, self.m);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let above = if linear {
                self.lower_tail(mid as i64) > u
            } else {
                self.ln_lower_tail(mid as i64) > ln_u
            };
            if above {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let j = lo;
        let p = self.pmf(j);
        let r = if linear {
            if p > 0.0 {
                (u - self.lower_tail(j as i64 - 1)) / p
            } else {
                0.5
            }
        } else {
            let lp = self.ln_pmf[j as usize];
            (ln_u - lp).exp() - (self.ln_lower_tail(j as i64 - 1) - lp).exp()
        };
        (j, r.clamp(0.0, 1.0))
    }

    fn normalize(&self, j: u64, r: f64) -> (u64, f64) {
        if r >= 1.0 && j < self.m {
            (j + 1, 0.0)
        } else {
            (j, r.min(1.0f64.next_down()))
        }
    }

    /// Inverse of [`Self::coupled_normal`]: the pair `(j, r)` with
    /// `Phi^{-1}(F_m(j - 1/2 + r)) = z`, `r` in `[0, 1)`.
    pub fn invert_normal(&self, z: f64) -> (u64, f64) {
        if z == 0.0 {
            return if self.m % 2 == 0 { (self.m / 2, 0.5) } else { (self.m.div_ceil(2), 0.0) };
        }
        let a = -z.abs();
        let u = normal_cdf(a);
        let ln_u = if u >= LINEAR_FLOOR { u.ln() } else { ln_normal_cdf(a) };
        let (j, r) = self.locate_lower(u, ln_u);
        if z < 0.0 {
            self.normalize(j, r)
        } else {
            self.normalize(self.m - j, 1.0 - r)
        }
    }

    /// `F_m^{-1}(u)` for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("F_m quantile level {u} outside (0, 1)")));
        }
        if u == 0.5 {
            return Ok(0.5 * self.m as f64);
        }
        let v = u.min(1.0 - u);
        let (j, r) = self.locate_lower(v, v.ln());
        let x = j as f64 - 0.5 + r;
        Ok(if u < 0.5 { x } else { self.m as f64 - x })
    }
}

/// `F_m(x)`.
pub fn fm_cdf(m: u64, x: f64) -> f64 {
    FmTable::new(m).cdf(x)
}

/// `F_m^{-1}(u)` for `u` in `(0, 1)`.
pub fn fm_quantile(m: u64, u: f64) -> Result<f64> {
    FmTable::new(m).quantile(u)
}

/// Lazily built tables keyed by `m`.
#[derive(Debug, Default, Clone)]
pub struct FmCache {
    tables: HashMap<u64, FmTable>,
}

impl FmCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, m: u64) -> &FmTable {
        self.tables.entry(m).or_insert_with(|| FmTable::new(m))
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

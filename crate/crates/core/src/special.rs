//! Probability mass functions with full relative accuracy.
//!
//! Binomial and Poisson masses are evaluated with Loader's saddle-point
//! expansion (the algorithm behind R's `dbinom`/`dpois`), which avoids the
//! catastrophic cancellation of `lgamma` differences for large counts.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

const LN_2PI: f64 = 1.837_877_066_409_345_483_560_659_472_811_235_279_722_794_947_275_566_825_634;

// ln(n!) - [(n + 1/2) ln n - n + ln(2 pi)/2] for n = 1..=15.
const STIRLERR_SMALL: [f64; 15] = [
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_094,
    0.027_677_925_684_998_339_149,
    0.020_790_672_103_765_093_112,
    0.016_644_691_189_821_192_163,
    0.013_876_128_823_070_747_999,
    0.011_896_709_945_891_770_095,
    0.010_411_265_261_972_096_497,
    0.009_255_462_182_712_732_917_7,
    0.008_330_563_433_362_871_256_5,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_865_7,
    0.006_408_994_188_004_207_068_4,
    0.005_951_370_112_758_847_735_6,
    0.005_554_733_551_962_801_371,
];

/// Error of Stirling's approximation to `ln(n!)` for integer `n >= 1`.
pub fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    debug_assert!(n >= 1);
    if n <= 15 {
        return STIRLERR_SMALL[(n - 1) as usize];
    }
    let n = n as f64;
    let nn = n * n;
    if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Natural log of the Poisson(`lambda`) mass at `x`.
pub fn ln_poisson_pmf(x: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0 {
        return -lambda;
    }
    let xf = x as f64;
    -stirlerr(x) - bd0(xf, lambda) - 0.5 * (LN_2PI + xf.ln())
}

pub fn poisson_pmf(x: u64, lambda: f64) -> f64 {
    ln_poisson_pmf(x, lambda).exp()
}

/// Natural log of the Binomial(`n`, `p`) mass at `x`; `q` must equal `1 - p`
/// and is passed separately so that callers keep full precision near 1.
pub fn ln_binom_pmf(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if x > n {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if x == 0 {
        if n == 0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = x as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

pub fn binom_pmf(x: u64, n: u64, p: f64) -> f64 {
    ln_binom_pmf(x, n, p, 1.0 - p).exp()
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Square root of the standard normal density, evaluated directly.
#[inline]
pub fn sqrt_normal_pdf(x: f64) -> f64 {
    // (2 pi)^{-1/4}
    const C: f64 = 0.631_618_777_746_064_7;
    C * (-0.25 * x * x).exp()
}

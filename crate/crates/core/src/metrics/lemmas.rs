//! Cell-wise inequalities for the square-root drift, the Haar sum
//! inequality, and the fourth moment of the root-transformed Poisson count.

use crate::density::DensityModel;
use crate::dyadic::{level_power_sum, DyadicIndex};
use crate::error::{Error, Result};
use crate::metrics::report::{format_number, BoundReport};
use crate::special::ln_poisson_pmf;

/// Deepest level on which the cell-wise checks run.
pub const MAX_LEMMA_LEVEL: u32 = 10;

/// Round-off allowance for the cell-wise comparisons.
const SLACK: f64 = 1e-15;

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEMMA_LEVEL {
        return Err(Error::InvalidInput(format!("level {level} exceeds {MAX_LEMMA_LEVEL}")));
    }
    Ok(())
}

/// `0 <= sqrt(f_{k,l}) - h_{k,l} <= 2^{k-1} f_{k,l}^{-3/2} int (f - f_{k,l})^2`
/// on every cell of levels `0..=max_level`.
pub fn jensen_gap_check(f: &DensityModel, max_level: u32) -> Result<BoundReport> {
    check_level(max_level)?;
    let mut report = BoundReport::new("jensen-gap", &["k", "l"], &[]);
    let mut nonnegative = true;
    for k in 0..=max_level {
        for idx in DyadicIndex::level_iter(k) {
            let lhs = f.jensen_gap(idx)?;
            let mean = f.cell_mean(idx);
            let rhs = (k as f64 - 1.0).exp2() * mean.powf(-1.5) * f.cell_variation(idx)?;
            nonnegative &= lhs >= 0.0;
            report.push(vec![k as f64, idx.position as f64], lhs, rhs, vec![])?;
        }
    }
    report.check("nonnegative", nonnegative, "sqrt(f_bar) - h >= 0 on every cell");
    report.check_dominance("upper-bound", 0.0, SLACK);
    Ok(report)
}

/// `|int sqrt(f) phi_{k,l} - theta_{k,l} / (2 sqrt(f_{k,l}))|
///  <= 2^{k/2-1} f_{k,l}^{-3/2} int (f - f_{k,l})^2` on levels `0..=max_level`.
pub fn sqrt_haar_check(f: &DensityModel, max_level: u32) -> Result<BoundReport> {
    check_level(max_level)?;
    let mut report = BoundReport::new("sqrt-haar", &["k", "l"], &[]);
    for k in 0..=max_level {
        for idx in DyadicIndex::level_iter(k) {
            let lhs = f.sqrt_haar_correction(idx)?.abs();
            let mean = f.cell_mean(idx);
            let rhs = (0.5 * k as f64 - 1.0).exp2() * mean.powf(-1.5) * f.cell_variation(idx)?;
            report.push(vec![k as f64, idx.position as f64], lhs, rhs, vec![])?;
        }
    }
    report.check_dominance("upper-bound", 0.0, SLACK);
    Ok(report)
}

/// `|beta - beta*| <= sqrt(4n) 2^{(k-1)/2 - 1} f^{-3/2} int (f - f_bar)^2` for
/// the parent cells of every detail level `1..=max_level`, where
/// `beta = sqrt(lambda)(2p - 1)` and `beta* = sqrt(4n) int sqrt(f) phi`.
pub fn drift_gap_check(f: &DensityModel, n: u64, max_level: u32) -> Result<BoundReport> {
    check_level(max_level)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let nf = n as f64;
    let root4n = (4.0 * nf).sqrt();
    let mut report = BoundReport::new("drift-gap", &["k", "l"], &["beta", "beta_star"]);
    for k in 1..=max_level {
        for parent in DyadicIndex::level_iter(k - 1) {
            let p = f.split_probability(parent);
            let beta = (nf * f.integrate_cell(parent)).sqrt() * (2.0 * p - 1.0);
            let beta_star = root4n * f.sqrt_haar_coefficient(parent)?;
            let mean = f.cell_mean(parent);
            let rhs = root4n
                * ((k as f64 - 1.0) / 2.0 - 1.0).exp2()
                * mean.powf(-1.5)
                * f.cell_variation(parent)?;
            let lhs = (beta - beta_star).abs();
            report.push(vec![k as f64, parent.position as f64], lhs, rhs, vec![beta, beta_star])?;
        }
    }
    // beta and beta* are O(sqrt(n)) and nearly equal; allow for cancellation.
    report.check_dominance("upper-bound", 0.0, 64.0 * f64::EPSILON * root4n);
    report.metadata.insert("n".into(), n.to_string());
    Ok(report)
}

/// `sum_{k >= k0} 2^k sum_l (int_{I_{k,l}} (f - f_{k,l})^2)^2
///  <= 2^{-c k0} / (1 - 2^{-c})^2 sum_{k >= k0} 2^{k(1+c)} sum_l theta^4`,
/// one row per `k0 <= max_level`, with both sums truncated at `max_level`.
pub fn haar_sum_check(f: &DensityModel, max_level: u32, c: f64) -> Result<BoundReport> {
    check_level(max_level)?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
    }
    let mut lhs_levels = Vec::with_capacity(max_level as usize + 1);
    let mut rhs_levels = Vec::with_capacity(max_level as usize + 1);
    for k in 0..=max_level {
        let mut s = 0.0;
        for idx in DyadicIndex::level_iter(k) {
            s += f.cell_variation(idx)?.powi(2);
        }
        lhs_levels.push((k as f64).exp2() * s);
        rhs_levels.push((k as f64 * (1.0 + c)).exp2() * level_power_sum(f, k, 4.0));
    }
    let mut report = BoundReport::new("haar-sum", &["k0", "c"], &[]);
    let prefactor = 1.0 / (1.0 - (-c).exp2()).powi(2);
    for k0 in 0..=max_level {
        let lhs: f64 = lhs_levels[k0 as usize..].iter().sum();
        let rhs = (-c * k0 as f64).exp2() * prefactor * rhs_levels[k0 as usize..].iter().sum::<f64>();
        report.push(vec![k0 as f64, c], lhs, rhs, vec![])?;
    }
    report.check_dominance("upper-bound", 0.0, SLACK);
    Ok(report)
}

/// `E(sqrt(X) - sqrt(lambda))^4` for `X ~ Poisson(lambda)`, by summing the
/// series until the remaining terms are below `1e-14` in total.
pub fn poisson_root_fourth_moment(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("Poisson mean {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let root = lambda.sqrt();
    let mut total = 0.0;
    let mut j = 0u64;
    loop {
        let jf = j as f64;
        let w = ln_poisson_pmf(j, lambda).exp();
        total += w * (jf.sqrt() - root).powi(4);
        // Past the mode the pmf ratio is lambda / (j + 1) < 1/2 once j > 2 lambda,
        // and (sqrt(j) - sqrt(lambda))^4 <= j^2, so the tail is at most
        // 2 w j^2 * (1 + 2/j)^2 <= 8 w (j + 1)^2.
        if jf > 2.0 * lambda && 8.0 * w * (jf + 1.0).powi(2) < 1e-14 {
            return Ok(total);
        }
        j += 1;
    }
}

/// Fourth-moment bound `<= 4` over a grid of means.
pub fn fourth_moment_check(lambdas: &[f64]) -> Result<BoundReport> {
    let mut report = BoundReport::new("poisson-fourth-moment", &["lambda"], &[]);
    for &lambda in lambdas {
        report.push(vec![lambda], poisson_root_fourth_moment(lambda)?, 4.0, vec![])?;
    }
    report.check_dominance("upper-bound", 0.0, 0.0);
    Ok(report)
}

/// All cell-wise and sum checks for one density.
pub fn lemma_checks(f: &DensityModel, max_level: u32, lambdas: &[f64], c: f64) -> Result<Vec<BoundReport>> {
    let mut reports = vec![
        jensen_gap_check(f, max_level)?,
        sqrt_haar_check(f, max_level)?,
        haar_sum_check(f, max_level, c)?,
        fourth_moment_check(lambdas)?,
    ];
    for r in &mut reports {
        r.metadata.insert("max_level".into(), max_level.to_string());
        r.metadata.insert("c".into(), format_number(c));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_density, DensitySpec, FamilySpec};

    fn linear() -> DensityModel {
        make_density(&DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5)).unwrap()
    }

    #[test]
    fn fourth_moment_values() {
        assert_eq!(poisson_root_fourth_moment(0.0).unwrap(), 0.0);
        // Oracle: plain recursive pmf over a generous fixed range.
        let mut p = (-1.0f64).exp();
        let mut oracle = 0.0;
        for j in 0..200 {
            if j > 0 {
                p /= j as f64;
            }
            oracle += p * ((j as f64).sqrt() - 1.0).powi(4);
        }
        let v = poisson_root_fourth_moment(1.0).unwrap();
        assert!((v - oracle).abs() < 1e-13);
        assert!((v - 0.4163).abs() < 1e-3);
        let r = fourth_moment_check(&[0.1, 1.0, 10.0, 100.0]).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn linear_cell_checks() {
        let f = linear();
        let a4 = jensen_gap_check(&f, 4).unwrap();
        assert!(a4.passed());
        assert!((a4.lhs[0] - 0.010_957_389).abs() < 1e-9);
        assert!((a4.rhs[0] - 1.0 / 24.0).abs() < 1e-15);
        assert!(sqrt_haar_check(&f, 4).unwrap().passed());
        assert!(drift_gap_check(&f, 4096, 4).unwrap().passed());
    }

    #[test]
    fn bump_sum_check() {
        let f = make_density(&DensitySpec::new(
            FamilySpec::SingleHaarBump { level: 3, position: 5, amplitude: 0.2 },
            0.4,
        ))
        .unwrap();
        let r = haar_sum_check(&f, 6, 2.0).unwrap();
        assert!(r.passed());
        // Levels 0..=3 each contribute 2^k a^4 for k0 <= 3.
        assert!((r.lhs[0] - 15.0 * 0.2f64.powi(4)).abs() < 1e-12);
        assert_eq!(r.lhs[4], 0.0);
    }

    #[test]
    fn rejects_deep_levels() {
        assert!(jensen_gap_check(&linear(), 11).is_err());
    }
}

//! Monte Carlo rates of the level-`k0` histogram estimator under the
//! square-root loss.

use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::dyadic::DyadicIndex;
use crate::error::{Error, Result};
use crate::metrics::report::{format_number, BoundReport};
use crate::quad::{integrate, Tolerance};
use crate::rng::{stream, Purpose};
use crate::transforms::{choose_k0, histogram_estimate, sample_fixed, sample_poisson_process};

/// How the sample behind the histogram is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleScheme {
    /// Exactly `n` i.i.d. points.
    Fixed,
    /// A Poisson process with intensity `n f`; the histogram still divides by `n`.
    Poisson,
}

/// Per-replicate losses of one histogram.
struct Losses {
    hellinger: f64,
    l2: f64,
    variance: f64,
}

fn replicate_losses(f: &DensityModel, values: &[f64], k0: u32) -> Result<Losses> {
    let tol = Tolerance::new(1e-300, 1e-12);
    let mut out = Losses { hellinger: 0.0, l2: 0.0, variance: 0.0 };
    for (idx, &c) in DyadicIndex::level_iter(k0).zip(values) {
        out.hellinger += f.cell_sqrt_distance(idx, c)?;
        let (a, b) = idx.cell();
        // Direct quadrature, independent of the bias/variance split.
        out.l2 += integrate(|x| (c - f.pdf(x)).powi(2), a, b, tol)?.value;
        out.variance += idx.width() * (c - f.cell_mean(idx)).powi(2);
    }
    Ok(out)
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// `sqrt(n) E int (sqrt(f_n) - sqrt(f))^2` for each `n`, with `k0` chosen
/// from `gamma`. Rows carry the Monte Carlo standard error, the `L2` risk
/// and its exact split into a variance part and the bias
/// `int (f - f_bar_{k0})^2`. The reference column is
/// `sqrt(n)(2^{k0} / n + bias) / eps0`, which dominates the risk.
pub fn rate_check(
    f: &DensityModel,
    ns: &[u64],
    gamma: &[f64],
    replicates: usize,
    seed: u64,
    scheme: SampleScheme,
) -> Result<BoundReport> {
    if replicates < 2 {
        return Err(Error::InvalidInput("rate check needs at least 2 replicates".into()));
    }
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) || ns[0] == 0 {
        return Err(Error::InvalidInput("sample sizes must be positive and increasing".into()));
    }
    let name = match scheme {
        SampleScheme::Fixed => "rate-fixed",
        SampleScheme::Poisson => "rate-poisson",
    };
    let mut report = BoundReport::new(
        name,
        &["n", "k0"],
        &["se", "l2_risk", "variance", "bias", "split_gap"],
    );
    let mut split_ok = true;
    for (i, &n) in ns.iter().enumerate() {
        let k0 = choose_k0(n, gamma)?;
        let mut bias = 0.0;
        for idx in DyadicIndex::level_iter(k0) {
            bias += f.cell_variation(idx)?;
        }
        let mut scaled = Vec::with_capacity(replicates);
        let (mut l2, mut variance, mut gap) = (0.0, 0.0, 0.0f64);
        for r in 0..replicates as u64 {
            let mut rng = stream(seed, Purpose::PointSample, ((i as u64) << 32) | r);
            let points = match scheme {
                SampleScheme::Fixed => sample_fixed(f, n as usize, &mut rng)?.points,
                SampleScheme::Poisson => sample_poisson_process(f, n, &mut rng)?.points,
            };
            let hist = histogram_estimate(&points, n as f64, k0)?;
            let losses = replicate_losses(f, &hist.values, k0)?;
            scaled.push((n as f64).sqrt() * losses.hellinger);
            l2 += losses.l2;
            variance += losses.variance;
            // The cross term integrates to zero cell by cell, sample by sample.
            gap = gap.max((losses.l2 - losses.variance - bias).abs() / losses.l2.max(1e-300));
        }
        let rf = replicates as f64;
        let (mean, se) = mean_se(&scaled);
        let nf = n as f64;
        let reference = nf.sqrt() * ((k0 as f64).exp2() / nf + bias) / f.eps0();
        split_ok &= gap <= 1e-8;
        report.push(
            vec![nf, k0 as f64],
            mean,
            reference,
            vec![se, l2 / rf, variance / rf, bias, gap],
        )?;
    }
    report.seed = Some(seed);
    report.replicates = Some(replicates);
    report.tolerances.insert("split_gap_rel".into(), 1e-8);
    report.check("l2-split", split_ok, "E int (f_n - f)^2 = variance + bias in every replicate");
    report.check_dominance("reference-bound", 0.0, 0.0);

    let se = report.column("se").expect("se column");
    let mut steps = Vec::new();
    let mut significant = true;
    for i in 1..report.len() {
        let drop = report.lhs[i - 1] - report.lhs[i];
        let noise = 2.0 * (se[i - 1].powi(2) + se[i].powi(2)).sqrt();
        significant &= drop > noise;
        steps.push(format!("{} vs 2se {}", format_number(drop), format_number(noise)));
    }
    report.check("decreasing-2se", significant, steps.join("; "));
    Ok(report)
}

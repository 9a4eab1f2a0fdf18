//! Dispatch of a configuration to its suite, and persistence of the results.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aeq_core::dyadic::{besov_tail_pow, level_power_sum};
use aeq_core::metrics::{
    decomposition_estimate, drift_gap_check, format_number, lemma_checks, quantile_shift_check,
    rate_check, thm3_bound, thm4_sweep, thm5_sweep, tusnady_check, SampleScheme, Thm5Pins,
    CONSTANTS_VERSION,
};
use aeq_core::rng::stream;
use aeq_core::transforms::sample_poisson_process;
use aeq_core::{
    analyze_path, count_pyramid, forward_map, inverse_map, make_density, transforms, BoundReport,
    CoefficientStack, CountPyramid, DensityModel, DitherStream, DyadicIndex, MapDiagnostics,
    PinnedConstants, Purpose, WhiteNoisePath,
};
use serde::{Deserialize, Serialize};

use crate::config::{default_k1, Command, ExperimentConfig, GammaSource, K0Choice, OutputFormat};
use crate::error::{CliError, Result};
use crate::gamma::gamma_sequence;

const DEFAULT_K_MAX: u32 = 16;
const DEFAULT_THM3_K_MAX: u32 = 20;
const DEFAULT_THM3_REPLICATES: usize = 32;
const DEFAULT_RATE_REPLICATES: usize = 200;
const DEFAULT_MAX_LEVEL: u32 = 8;

/// Output of `transform`: the counts, their image and the map diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformOutput {
    pub pyramid: CountPyramid,
    pub stack: CoefficientStack,
    pub diagnostics: MapDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionOutput {
    pub pyramid: CountPyramid,
    pub diagnostics: MapDiagnostics,
    /// Whether the recovered counts equal those stored next to the input stack.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_input: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub path: WhiteNoisePath,
    pub stack: CoefficientStack,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StackInput {
    Transform(TransformOutput),
    Stack(CoefficientStack),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Reports(Vec<BoundReport>),
    Transform(TransformOutput),
    Inversion(InversionOutput),
    Simulation(SimulationOutput),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: SuiteStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl SuiteResult {
    fn from_report(report: &BoundReport) -> Self {
        let failed: Vec<&str> =
            report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            Self { name: report.name.clone(), status: SuiteStatus::Pass, reason: None }
        } else {
            Self {
                name: report.name.clone(),
                status: SuiteStatus::Fail,
                reason: Some(format!("failed checks: {}", failed.join(", "))),
            }
        }
    }

    fn skipped(name: &str, reason: &str) -> Self {
        Self { name: name.into(), status: SuiteStatus::Skipped, reason: Some(reason.into()) }
    }

    fn diagnostics(name: &str, d: MapDiagnostics) -> Self {
        if d.is_clean() {
            Self { name: name.into(), status: SuiteStatus::Pass, reason: None }
        } else {
            Self {
                name: name.into(),
                status: SuiteStatus::Fail,
                reason: Some(format!("{} saturated, {} clamped", d.saturated, d.clamped)),
            }
        }
    }
}

/// Provenance of one run. Kept apart from the report files, which must be
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub constants_version: u32,
    pub wall_time_seconds: f64,
    pub suites: Vec<SuiteResult>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != SuiteStatus::Fail)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifact: Artifact,
    pub manifest: RunManifest,
}

impl RunOutput {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match (&self.artifact, format) {
            (Artifact::Reports(reports), OutputFormat::Csv) => {
                let blocks = reports.iter().map(BoundReport::to_csv).collect::<aeq_core::Result<Vec<_>>>()?;
                Ok(blocks.join("\n"))
            }
            (Artifact::Reports(reports), OutputFormat::Json) => pretty(reports),
            (Artifact::Transform(t), OutputFormat::Json) => pretty(t),
            (Artifact::Inversion(i), OutputFormat::Json) => pretty(i),
            (Artifact::Simulation(s), OutputFormat::Json) => pretty(s),
            (Artifact::Transform(t), OutputFormat::Csv) => {
                let mut rows = LongCsv::new()?;
                rows.pyramid(&t.pyramid)?;
                rows.stack(&t.stack)?;
                rows.finish()
            }
            (Artifact::Inversion(i), OutputFormat::Csv) => {
                let mut rows = LongCsv::new()?;
                rows.pyramid(&i.pyramid)?;
                rows.finish()
            }
            (Artifact::Simulation(s), OutputFormat::Csv) => {
                let mut rows = LongCsv::new()?;
                for (i, y) in s.path.values().into_iter().enumerate() {
                    rows.row("path", s.path.k1, i as u64, format_number(y))?;
                }
                rows.stack(&s.stack)?;
                rows.finish()
            }
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// `section,level,position,value` rows for counts, coefficients and paths.
struct LongCsv(csv::Writer<Vec<u8>>);

impl LongCsv {
    fn new() -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "level", "position", "value"]).map_err(csv_error)?;
        Ok(Self(w))
    }

    fn row(&mut self, section: &str, level: u32, position: u64, value: String) -> Result<()> {
        self.0
            .write_record([section, &level.to_string(), &position.to_string(), &value])
            .map_err(csv_error)
    }

    fn pyramid(&mut self, p: &CountPyramid) -> Result<()> {
        for k in p.k0..=p.k1 {
            for (l, &c) in p.level(k).iter().enumerate() {
                self.row("count", k, l as u64, c.to_string())?;
            }
        }
        Ok(())
    }

    fn stack(&mut self, s: &CoefficientStack) -> Result<()> {
        for (l, &v) in s.base.iter().enumerate() {
            self.row("base", s.k0, l as u64, format_number(v))?;
        }
        for k in s.k0 + 1..=s.k1 {
            for (l, &v) in s.level(k).iter().enumerate() {
                self.row("detail", k, l as u64, format_number(v))?;
            }
        }
        for k in s.k0..=s.k1 {
            self.row("sigma", k, 0, format_number(s.sigma_at(k)))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<String> {
        let bytes = self.0.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Config(format!("csv: {e}"))
}

/// Runs the configured suite.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let pinned = PinnedConstants::load()?;
    let ctx = Context { config, pinned: &pinned };
    let (artifact, suites) = match config.command {
        Command::Transform => ctx.transform()?,
        Command::Invert => ctx.invert()?,
        Command::Simulate => ctx.simulate()?,
        Command::Besov => ctx.reports(vec![ctx.besov()?]),
        Command::VerifyThm3 => ctx.reports(vec![ctx.thm3()?]),
        Command::VerifyThm4 => ctx.reports(vec![ctx.thm4()?]),
        Command::VerifyThm5 => ctx.thm5()?,
        Command::VerifyTusnady => ctx.tusnady()?,
        Command::VerifyLemmas => ctx.lemmas()?,
        Command::VerifyRates => ctx.reports(vec![ctx.rates()?]),
    };
    let manifest = RunManifest {
        config: config.clone(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        constants_version: CONSTANTS_VERSION,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        suites,
    };
    Ok(RunOutput { artifact, manifest })
}

/// Path of the manifest written next to a report file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the rendered artifact to `config.out` (returning `None`) or hands
/// it back for standard output.
pub fn persist(output: &RunOutput, config: &ExperimentConfig) -> Result<Option<String>> {
    let text = output.render(config.format)?;
    let Some(out) = &config.out else {
        return Ok(Some(text));
    };
    let write = |path: &Path, body: &str| {
        fs::write(path, body).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
    };
    write(out, &text)?;
    write(&manifest_path(out), &pretty(&output.manifest)?)?;
    Ok(None)
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    pinned: &'a PinnedConstants,
}

type Outcome = (Artifact, Vec<SuiteResult>);

impl Context<'_> {
    fn density(&self) -> Result<DensityModel> {
        let spec = self.config.density.as_ref().ok_or_else(|| {
            CliError::Config(format!("{} needs a density", self.config.command))
        })?;
        Ok(make_density(spec)?)
    }

    fn n(&self) -> Result<u64> {
        self.config.n.ok_or_else(|| CliError::Config(format!("{} needs n", self.config.command)))
    }

    fn k_max(&self, default: u32) -> u32 {
        self.config.grids.k_max.unwrap_or(default)
    }

    fn gamma(&self, f: &DensityModel) -> Result<Vec<f64>> {
        match &self.config.k0 {
            Some(K0Choice::Auto(auto)) => match &auto.auto {
                GammaSource::Gamma(g) => Ok(g.clone()),
                GammaSource::Family { densities, k_max } => {
                    let family = if densities.is_empty() {
                        vec![f.clone()]
                    } else {
                        densities.iter().map(make_density).collect::<aeq_core::Result<Vec<_>>>()?
                    };
                    gamma_sequence(&family, *k_max)
                }
            },
            _ => gamma_sequence(std::slice::from_ref(f), self.k_max(DEFAULT_K_MAX)),
        }
    }

    fn k0(&self, f: &DensityModel, n: u64) -> Result<u32> {
        match &self.config.k0 {
            Some(K0Choice::Level(k)) => Ok(*k),
            _ => Ok(transforms::choose_k0(n, &self.gamma(f)?)?),
        }
    }

    fn levels(&self, f: &DensityModel, n: u64) -> Result<(u32, u32)> {
        let k0 = self.k0(f, n)?;
        let k1 = self.config.k1.unwrap_or_else(|| default_k1(n));
        if k0 >= k1 {
            return Err(CliError::Config(format!("k0 = {k0} must be below k1 = {k1}")));
        }
        Ok((k0, k1))
    }

    /// Tags a report with the inputs that determine it.
    fn provenance(&self, report: &mut BoundReport) {
        let c = self.config;
        let meta = &mut report.metadata;
        meta.insert("command".into(), c.command.to_string());
        meta.insert("constants_version".into(), CONSTANTS_VERSION.to_string());
        meta.insert("config_seed".into(), c.seed.to_string());
        if let Some(d) = &c.density {
            meta.insert("density".into(), serde_json::to_string(d).unwrap_or_default());
        }
        if let Some(k0) = &c.k0 {
            meta.insert("k0_rule".into(), serde_json::to_string(k0).unwrap_or_default());
        }
        meta.insert("grids".into(), serde_json::to_string(&c.grids).unwrap_or_default());
    }

    fn reports(&self, mut reports: Vec<BoundReport>) -> Outcome {
        for r in &mut reports {
            self.provenance(r);
        }
        let suites = reports.iter().map(SuiteResult::from_report).collect();
        (Artifact::Reports(reports), suites)
    }

    fn transform(&self) -> Result<Outcome> {
        let f = self.density()?;
        let n = self.n()?;
        let (k0, k1) = self.levels(&f, n)?;
        let seed = self.config.seed;
        let sample = sample_poisson_process(&f, n, &mut stream(seed, Purpose::PointSample, 0))?;
        let pyramid = count_pyramid(&sample, k0, k1)?;
        let (stack, diagnostics) = forward_map(&pyramid, &DitherStream::new(seed, 0), n)?;
        let suites = vec![SuiteResult::diagnostics("forward-map", diagnostics)];
        Ok((Artifact::Transform(TransformOutput { pyramid, stack, diagnostics }), suites))
    }

    fn invert(&self) -> Result<Outcome> {
        let path = self.config.input.as_ref().ok_or_else(|| CliError::Config("invert needs an input file".into()))?;
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let input: StackInput = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("{}: not a JSON transform output or coefficient stack: {e}", path.display()))
        })?;
        let (stack, expected) = match input {
            StackInput::Transform(t) => (t.stack, Some(t.pyramid)),
            StackInput::Stack(s) => (s, None),
        };
        let (pyramid, diagnostics) = inverse_map(&stack)?;
        let matches_input = expected.map(|p| p == pyramid);
        let mut suites = vec![SuiteResult::diagnostics("inverse-map", diagnostics)];
        suites.push(match matches_input {
            Some(true) => SuiteResult { name: "round-trip".into(), status: SuiteStatus::Pass, reason: None },
            Some(false) => SuiteResult {
                name: "round-trip".into(),
                status: SuiteStatus::Fail,
                reason: Some("recovered counts differ from the stored pyramid".into()),
            },
            None => SuiteResult::skipped("round-trip", "input holds no reference pyramid"),
        });
        Ok((Artifact::Inversion(InversionOutput { pyramid, diagnostics, matches_input }), suites))
    }

    fn simulate(&self) -> Result<Outcome> {
        let f = self.density()?;
        let n = self.n()?;
        let (k0, k1) = self.levels(&f, n)?;
        let mut rng = stream(self.config.seed, Purpose::WhiteNoise, 0);
        let path = transforms::simulate_white_noise(&f, n, k1, &mut rng)?;
        let stack = analyze_path(&path, k0)?;
        let suites = vec![SuiteResult { name: "simulate".into(), status: SuiteStatus::Pass, reason: None }];
        Ok((Artifact::Simulation(SimulationOutput { path, stack }), suites))
    }

    /// `int (f - f_bar_k)^2 - int (f - f_bar_{K+1})^2` against
    /// `sum_{j=k}^{K} sum_l theta_{j,l}^2`, with Besov tails alongside.
    fn besov(&self) -> Result<BoundReport> {
        let f = self.density()?;
        let k_max = self.k_max(DEFAULT_K_MAX);
        let rows = self.config.grids.max_level.unwrap_or(DEFAULT_MAX_LEVEL);
        if rows > k_max {
            return Err(CliError::Config(format!("max_level {rows} exceeds k_max {k_max}")));
        }
        let bias = |k: u32| -> Result<f64> {
            let mut total = 0.0;
            for idx in DyadicIndex::level_iter(k) {
                total += f.cell_variation(idx)?;
            }
            Ok(total)
        };
        let floor = bias(k_max + 1)?;
        let squares: Vec<f64> = (0..=k_max).map(|k| level_power_sum(&f, k, 2.0)).collect();
        let gamma = self.gamma(&f)?;
        let mut report =
            BoundReport::new("besov", &["k"], &["bias", "tail_half_2_2", "tail_4_4", "gamma"]);
        let mut worst: f64 = 0.0;
        for k in 0..=rows {
            let b = bias(k)?;
            let lhs = b - floor;
            let rhs: f64 = squares[k as usize..].iter().rev().sum();
            worst = worst.max((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));
            let half = besov_tail_pow(&f, 0.5, 2.0, 2.0, k, k_max)?;
            let quartic = besov_tail_pow(&f, 0.5, 4.0, 4.0, k, k_max)?.powf(0.25);
            let g = gamma.get(k as usize).or(gamma.last()).copied().unwrap_or(0.0);
            report.push(vec![k as f64], lhs, rhs, vec![b, half, quartic, g])?;
        }
        report.tolerances.insert("parseval_rel".into(), 1e-10);
        report.metadata.insert("k_max".into(), k_max.to_string());
        report.check(
            "parseval",
            worst <= 1e-10 || report.rhs.iter().all(|&r| r == 0.0) && report.lhs.iter().all(|&l| l.abs() < 1e-18),
            format!("max relative gap {}", format_number(worst)),
        );
        Ok(report)
    }

    fn thm3(&self) -> Result<BoundReport> {
        let f = self.density()?;
        let ns = match &self.config.grids.ns {
            Some(ns) => ns.clone(),
            None => vec![self.n()?],
        };
        let replicates = self.config.replicates.unwrap_or(DEFAULT_THM3_REPLICATES);
        let k_max = self.k_max(DEFAULT_THM3_K_MAX);
        let constants = self.pinned.thm3();
        let mut report = BoundReport::new(
            "thm3",
            &["n", "k0", "k1"],
            &["total_se", "base", "details", "term1", "term2", "term3"],
        );
        for &n in &ns {
            let k0s = match &self.config.grids.k0s {
                Some(k0s) => k0s.clone(),
                None => vec![self.k0(&f, n)?],
            };
            let k1 = self.config.k1.unwrap_or_else(|| default_k1(n));
            for k0 in k0s {
                if k0 >= k1 {
                    return Err(CliError::Config(format!("k0 = {k0} must be below k1 = {k1}")));
                }
                let d = decomposition_estimate(&f, n, k0, k1, replicates, self.config.seed)?;
                let b = thm3_bound(&f, n, k0, k_max.max(k1), constants)?;
                report.push(
                    vec![n as f64, k0 as f64, k1 as f64],
                    d.total,
                    b.total,
                    vec![d.total_se, d.base, d.total - d.base, b.term1, b.term2, b.term3],
                )?;
            }
        }
        report.seed = Some(self.config.seed);
        report.replicates = Some(replicates);
        report.metadata.insert("c".into(), format_number(constants.c));
        report.metadata.insert("d1".into(), format_number(constants.d1));
        report.metadata.insert("d2".into(), format_number(constants.d2));
        report.check_dominance("bound-dominates", 0.0, 0.0);
        Ok(report)
    }

    fn thm4(&self) -> Result<BoundReport> {
        let lambdas = self.config.grids.lambdas.clone().unwrap_or_else(|| vec![256.0, 1024.0, 4096.0, 16384.0]);
        Ok(thm4_sweep(&lambdas, self.config.grids.shifted.unwrap_or(false), Some(self.pinned.c))?)
    }

    /// Pinned suprema are only comparable on the grid they were taken over.
    fn on_pilot_grid<T: PartialEq>(&self, grid: &T, pilot: &T, report_name: &str, skips: &mut Vec<SuiteResult>) -> bool {
        let same = grid == pilot;
        if !same {
            skips.push(SuiteResult::skipped(
                &format!("{report_name}-pinned"),
                "grid differs from the pilot grid",
            ));
        }
        same
    }

    fn thm5(&self) -> Result<Outcome> {
        let pilot = &self.pinned.grids;
        let ms = self.config.grids.ms.clone().unwrap_or_else(|| pilot.thm5_ms.clone());
        let ps = self.config.grids.ps.clone().unwrap_or_else(|| pilot.thm5_ps.clone());
        let mut skips = Vec::new();
        let pinned = self.on_pilot_grid(&(&ms, &ps), &(&pilot.thm5_ms, &pilot.thm5_ps), "thm5", &mut skips);
        let pins = pinned.then_some(Thm5Pins { c1: self.pinned.c1, d: self.pinned.d });
        let (artifact, mut suites) = self.reports(vec![thm5_sweep(&ms, &ps, pins)?]);
        suites.extend(skips);
        Ok((artifact, suites))
    }

    fn tusnady(&self) -> Result<Outcome> {
        let pilot = &self.pinned.grids.boundary_ms;
        let ms = self.config.grids.ms.clone().unwrap_or_else(|| pilot.clone());
        let mut skips = Vec::new();
        let pinned = self.on_pilot_grid(&ms, pilot, "tusnady", &mut skips);
        let reports = vec![
            tusnady_check(&ms, pinned.then_some(self.pinned.c0))?,
            quantile_shift_check(&ms, pinned.then_some(self.pinned.c2))?,
        ];
        let (artifact, mut suites) = self.reports(reports);
        suites.extend(skips);
        Ok((artifact, suites))
    }

    fn lemmas(&self) -> Result<Outcome> {
        let f = self.density()?;
        let g = &self.config.grids;
        let max_level = g.max_level.unwrap_or(DEFAULT_MAX_LEVEL);
        let lambdas = g.lambdas.clone().unwrap_or_else(|| vec![0.1, 1.0, 10.0, 100.0]);
        let mut reports = lemma_checks(&f, max_level, &lambdas, g.c.unwrap_or(2.0))?;
        if let Some(n) = self.config.n {
            reports.push(drift_gap_check(&f, n, max_level)?);
        }
        let (artifact, mut suites) = self.reports(reports);
        if self.config.n.is_none() {
            suites.push(SuiteResult::skipped("drift-gap", "n not set"));
        }
        Ok((artifact, suites))
    }

    fn rates(&self) -> Result<BoundReport> {
        let f = self.density()?;
        let g = &self.config.grids;
        let ns = g.ns.clone().unwrap_or_else(|| vec![256, 1024, 4096, 16384]);
        let replicates = self.config.replicates.unwrap_or(DEFAULT_RATE_REPLICATES);
        let scheme = g.scheme.unwrap_or(SampleScheme::Fixed);
        Ok(rate_check(&f, &ns, &self.gamma(&f)?, replicates, self.config.seed, scheme)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aeq_core::{DensitySpec, FamilySpec};

    fn config(command: Command) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(command);
        c.density = Some(DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5));
        c
    }

    #[test]
    fn besov_parseval_and_tail() {
        let mut c = config(Command::Besov);
        c.grids.k_max = Some(18);
        c.grids.max_level = Some(4);
        let out = run(&c).unwrap();
        assert!(out.manifest.passed());
        let Artifact::Reports(r) = &out.artifact else { panic!("expected reports") };
        let tails = r[0].column("tail_half_2_2").unwrap();
        for (k, t) in tails.iter().enumerate() {
            let expected = (-(k as f64) - 3.0).exp2() - (-22.0f64).exp2();
            assert!((t - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn transform_then_invert() {
        let mut c = config(Command::Transform);
        c.n = Some(256);
        c.k0 = Some(K0Choice::Level(2));
        c.seed = 5;
        let out = run(&c).unwrap();
        let Artifact::Transform(t) = &out.artifact else { panic!("expected transform") };
        assert_eq!(t.stack.k1, 8);
        let dir = std::env::temp_dir().join(format!("aeq-run-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let input = dir.join("t.json");
        fs::write(&input, out.render(OutputFormat::Json).unwrap()).unwrap();
        let mut inv = ExperimentConfig::new(Command::Invert);
        inv.input = Some(input);
        let back = run(&inv).unwrap();
        let Artifact::Inversion(i) = &back.artifact else { panic!("expected inversion") };
        assert_eq!(i.matches_input, Some(true));
        assert!(back.manifest.passed());
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn long_csv_layout() {
        let mut c = config(Command::Simulate);
        c.n = Some(64);
        c.k0 = Some(K0Choice::Level(1));
        c.k1 = Some(3);
        let text = run(&c).unwrap().render(OutputFormat::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("section,level,position,value"));
        assert_eq!(lines.next(), Some("path,3,0,0"));
        assert_eq!(text.lines().filter(|l| l.starts_with("path,")).count(), 9);
        assert_eq!(text.lines().filter(|l| l.starts_with("sigma,")).count(), 3);
    }

    #[test]
    fn manifest_path_appends() {
        assert_eq!(manifest_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest.json"));
    }
}

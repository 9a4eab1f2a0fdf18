//! Experiment configuration: a single JSON document plus command-line
//! overrides.

use std::fmt;
use std::path::PathBuf;

use aeq_core::metrics::SampleScheme;
use aeq_core::DensitySpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample a Poisson process and map its counts to white-noise coefficients.
    Transform,
    /// Map a coefficient stack back to counts.
    Invert,
    /// Simulate a white-noise path and analyze it into coefficients.
    Simulate,
    /// Monte Carlo decomposition of the end-to-end distance against its bound.
    VerifyThm3,
    /// Hellinger distance of the root-transformed Poisson law to its normal limit.
    VerifyThm4,
    /// Binomial quantile coupling against the normal with matched mean.
    VerifyThm5,
    /// Standardized coupling boundaries and the quantile shift.
    VerifyTusnady,
    /// Per-cell square-root inequalities, the Haar sum inequality and Poisson moments.
    VerifyLemmas,
    /// Scaled Hellinger risk of the histogram estimator across sample sizes.
    VerifyRates,
    /// Besov tails and the Haar bias identity.
    Besov,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Invert => "invert",
            Command::Simulate => "simulate",
            Command::VerifyThm3 => "verify-thm3",
            Command::VerifyThm4 => "verify-thm4",
            Command::VerifyThm5 => "verify-thm5",
            Command::VerifyTusnady => "verify-tusnady",
            Command::VerifyLemmas => "verify-lemmas",
            Command::VerifyRates => "verify-rates",
            Command::Besov => "besov",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Where the `gamma_k` sequence behind an automatic `k0` comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaSource {
    /// An explicit nonincreasing sequence `gamma_0, gamma_1, ...`.
    Gamma(Vec<f64>),
    /// The pointwise maximum of the Besov tails over a listed family; an
    /// empty list means the configured density alone.
    Family {
        #[serde(default)]
        densities: Vec<DensitySpec>,
        k_max: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoK0 {
    pub auto: GammaSource,
}

/// Deepest level for computed `gamma_k`; each level sums over `2^k` cells.
pub const MAX_GAMMA_LEVEL: u32 = 24;

/// `k0` as a level or as the rule `min{k : gamma_k <= 4^k / n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum K0Choice {
    Level(u32),
    Auto(AutoK0),
}

/// Per-suite grids and knobs. Unset fields take suite defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// Poisson means for `verify-thm4` and `verify-lemmas`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Use the `2 sqrt(X + U + 1/2)` variant in `verify-thm4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ms: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<f64>>,
    /// Sample sizes for `verify-rates` and `verify-thm3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<u64>>,
    /// Base levels for `verify-thm3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0s: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
    /// Exponent in the Haar sum inequality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Deepest level entering Haar sums and Besov tails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SampleScheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<K0Choice>,
    /// Finest level; defaults to `ceil(log2 n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<u32>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub grids: Grids,
    /// Input file for `invert`: the output of `transform` or a bare stack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// `ceil(log2 n)`, the default finest level.
pub fn default_k1(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            density: None,
            n: None,
            k0: None,
            k1: None,
            seed: 0,
            replicates: None,
            grids: Grids::default(),
            input: None,
            out: None,
            format: OutputFormat::default(),
        }
    }

    /// Parses a config document. When `overrides.command` is set the
    /// document may omit `command`, but must not contradict it.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        let object = value
            .as_object_mut()
            .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
        if let Some(command) = overrides.command {
            let name = serde_json::Value::String(command.name().into());
            match object.get("command") {
                None => {
                    object.insert("command".into(), name);
                }
                Some(existing) if *existing == name => {}
                Some(existing) => {
                    return Err(CliError::Config(format!(
                        "config names command {existing} but {command} was requested"
                    )))
                }
            }
        }
        let mut config: Self =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(out) = &overrides.out {
            self.out = Some(out.clone());
        }
        if let Some(format) = overrides.format {
            self.format = format;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.replicates == Some(0) {
            return bad("replicates must be at least 1".into());
        }
        if self.n == Some(0) {
            return bad("n must be positive".into());
        }
        if let (Some(K0Choice::Level(k0)), Some(k1)) = (&self.k0, self.k1) {
            if *k0 >= k1 {
                return bad(format!("k0 = {k0} must be below k1 = {k1}"));
            }
        }
        if let Some(K0Choice::Auto(AutoK0 { auto: GammaSource::Gamma(g) })) = &self.k0 {
            if g.is_empty() || g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("gamma must be a nonempty list of nonnegative numbers".into());
            }
            if g.windows(2).any(|w| w[1] > w[0]) {
                return bad("gamma must be nonincreasing".into());
            }
        }
        if let Some(K0Choice::Auto(AutoK0 { auto: GammaSource::Family { k_max, .. } })) = &self.k0 {
            if *k_max > MAX_GAMMA_LEVEL {
                return bad(format!("gamma k_max = {k_max} exceeds {MAX_GAMMA_LEVEL}"));
            }
        }
        let needs_density = !matches!(
            self.command,
            Command::Invert | Command::VerifyThm4 | Command::VerifyThm5 | Command::VerifyTusnady
        );
        if needs_density && self.density.is_none() {
            return bad(format!("{} needs a density", self.command));
        }
        let needs_n = matches!(self.command, Command::Transform | Command::Simulate);
        if needs_n && self.n.is_none() {
            return bad(format!("{} needs n", self.command));
        }
        if self.command == Command::VerifyThm3 && self.n.is_none() && self.grids.ns.is_none() {
            return bad("verify-thm3 needs n or grids.ns".into());
        }
        if self.command == Command::Invert && self.input.is_none() {
            return bad("invert needs an input file".into());
        }
        if self.command == Command::VerifyRates && !matches!(self.k0, Some(K0Choice::Auto(_))) {
            return bad("verify-rates needs k0 = {\"auto\": ...}".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aeq_core::FamilySpec;

    fn sample() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Command::VerifyThm3);
        c.density = Some(DensitySpec::new(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5));
        c.n = Some(1024);
        c.k0 = Some(K0Choice::Auto(AutoK0 {
            auto: GammaSource::Family { densities: vec![], k_max: 12 },
        }));
        c.seed = u64::MAX;
        c.replicates = Some(8);
        c.grids.ps = Some(vec![0.1, 0.30000000000000004]);
        c
    }

    #[test]
    fn round_trip() {
        let c = sample();
        let back = ExperimentConfig::parse(&c.to_json().unwrap(), &Overrides::default()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn density_schema() {
        let text = r#"{"command": "transform", "n": 64,
            "density": {"family": "linear", "params": {"a": 0.5, "b": 1.0}, "eps0": 0.5}}"#;
        let c = ExperimentConfig::parse(text, &Overrides::default()).unwrap();
        assert_eq!(c.density.unwrap().family, FamilySpec::Linear { a: 0.5, b: 1.0 });
        assert_eq!(c.format, OutputFormat::Csv);
    }

    #[test]
    fn overrides_and_conflicts() {
        let text = r#"{"seed": 3}"#;
        let o = Overrides { command: Some(Command::VerifyThm4), seed: Some(9), ..Default::default() };
        let c = ExperimentConfig::parse(text, &o).unwrap();
        assert_eq!((c.command, c.seed), (Command::VerifyThm4, 9));
        let o = Overrides { command: Some(Command::Besov), ..Default::default() };
        assert!(ExperimentConfig::parse(r#"{"command": "verify-thm4"}"#, &o).is_err());
    }

    #[test]
    fn rejects_invalid() {
        let o = Overrides::default();
        for text in [
            r#"{"command": "verify-thm4", "replicates": 0}"#,
            r#"{"command": "verify-thm4", "k0": 5, "k1": 5}"#,
            r#"{"command": "verify-thm4", "bogus": 1}"#,
            r#"{"command": "verify-thm4", "k0": {"auto": {"gamma": [0.1, 0.2]}}}"#,
            r#"{"command": "verify-thm4", "k0": {"auto": {"family": {"k_max": 25}}}}"#,
            r#"{"command": "transform", "n": 64}"#,
            r#"{"command": "invert"}"#,
            r#"[1, 2]"#,
        ] {
            assert!(ExperimentConfig::parse(text, &o).is_err(), "{text}");
        }
    }

    #[test]
    fn k1_default() {
        assert_eq!(default_k1(1), 0);
        assert_eq!(default_k1(4096), 12);
        assert_eq!(default_k1(4097), 13);
    }
}

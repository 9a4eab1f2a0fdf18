//! Configuration, orchestration and report persistence for the `aeq`
//! command-line tool.
//!
//! A run is described by an [`ExperimentConfig`] (one JSON document, with a
//! few fields overridable from the command line). [`run`] dispatches it to
//! the matching suite and returns the artifact together with a
//! [`RunManifest`]; [`persist`] writes both.

pub mod config;
mod error;
pub mod gamma;
pub mod run;

pub use config::{
    default_k1, AutoK0, Command, ExperimentConfig, GammaSource, Grids, K0Choice, OutputFormat,
    Overrides,
};
pub use error::{CliError, Result, EXIT_ASSERTION, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PASS};
pub use gamma::gamma_sequence;
pub use run::{
    manifest_path, persist, run, Artifact, InversionOutput, RunManifest, RunOutput,
    SimulationOutput, SuiteResult, SuiteStatus, TransformOutput,
};

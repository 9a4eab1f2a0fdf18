use std::path::PathBuf;
use std::process::ExitCode;

use aeq_cli::{persist, run, Command, CliError, ExperimentConfig, OutputFormat, Overrides};
use clap::Parser;

/// Equivalence-mapping transforms and verification suites.
#[derive(Parser, Debug)]
#[command(name = "aeq", version, about)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Report file; a `.manifest.json` file is written next to it.
    /// Without it the report goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; defaults to the configuration, then CSV.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("aeq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.clone(), source })?;
    let overrides = Overrides {
        command: Some(args.command),
        seed: args.seed,
        out: args.out.clone(),
        format: args.format,
    };
    let config = ExperimentConfig::parse(&text, &overrides)?;
    let output = run(&config)?;
    if let Some(text) = persist(&output, &config)? {
        print!("{text}");
    }
    for suite in &output.manifest.suites {
        let reason = suite.reason.as_deref().map(|r| format!(" ({r})")).unwrap_or_default();
        eprintln!("{}: {:?}{reason}", suite.name, suite.status);
    }
    Ok(if output.manifest.passed() { aeq_cli::EXIT_PASS } else { aeq_cli::EXIT_ASSERTION })
}

//! Batch front end: builds a system from a [`RunConfig`], runs one command
//! and produces a versioned JSON report plus optional CSV files.

pub mod args;
mod commands;
pub mod config;
pub mod json;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use obstruct_core::beta::{parse_beta, BetaSystem, PrecisionPolicy};
use obstruct_core::formats::parse_expansion_file;

pub use config::{Command, DecompOp, RunConfig, SchemeKind, SystemSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] obstruct_core::error::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
}

/// How a run ended; the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
            Outcome::Inconclusive => 3,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Violation => "violation",
            Outcome::Inconclusive => "inconclusive",
        }
    }

    /// Violation dominates inconclusive, which dominates pass.
    pub fn combine(outcomes: impl IntoIterator<Item = Outcome>) -> Outcome {
        outcomes.into_iter().fold(Outcome::Pass, |acc, o| match (acc, o) {
            (Outcome::Violation, _) | (_, Outcome::Violation) => Outcome::Violation,
            (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Pass,
        })
    }
}

pub const INPUT_ERROR_EXIT: i32 = 2;

/// Result of one command before anything is written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub result: Value,
    /// Extra files for `--out`, `(name, contents)`.
    pub files: Vec<(String, String)>,
    /// CSV files written with `--emit-csv`.
    pub csv: Vec<(String, String)>,
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn build_system(config: &RunConfig) -> Result<BetaSystem, CliError> {
    let sys = match &config.system {
        SystemSpec::Beta { literal } => {
            let beta = parse_beta(literal)?;
            let policy = PrecisionPolicy {
                initial_bits: config.precision_bits,
                max_bits: config.precision_bits.max(PrecisionPolicy::default().max_bits),
            };
            BetaSystem::from_beta(&beta, config.digits, &policy)?
        }
        SystemSpec::ExpansionFile { path } => BetaSystem::from_expansion(parse_expansion_file(&read_file(path)?)?)?,
    };
    Ok(sys.with_enumeration_cap(config.enumeration_cap))
}

pub fn execute(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let sys = build_system(config)?;
    match config.command {
        Command::Expand => commands::expand(config, &sys),
        Command::Entropy => commands::entropy(config, &sys),
        Command::Verify => commands::verify(config, &sys),
        Command::Factor => commands::factor(config, &sys),
        Command::Mme => commands::mme(config, &sys),
        Command::Decomp => commands::decomp(config, &sys),
    }
}

/// The report document. `timestamp` is the only field that may differ
/// between runs of the same config.
pub fn render_report(config: &RunConfig, out: &RunOutput, timestamp: Option<u64>) -> String {
    let mut doc = json!({
        "schema": json::SCHEMA_VERSION,
        "command": config.command.name(),
        "config": config,
        "status": out.outcome.label(),
        "exit_code": out.outcome.exit_code(),
        "result": out.result,
    });
    if let Some(t) = timestamp {
        doc["timestamp"] = json!(t);
    }
    json::canonical(&doc)
}

/// Runs a config and writes its outputs: `report.json` and the extra files
/// under `out_dir`, or the report alone on stdout.
pub fn run_and_write(config: &RunConfig) -> Result<Outcome, CliError> {
    let out = execute(config)?;
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .ok();
    let report = render_report(config, &out, timestamp);
    match &config.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            write_file(&dir.join("report.json"), &report)?;
            for (name, contents) in &out.files {
                write_file(&dir.join(name), contents)?;
            }
            if config.emit_csv {
                for (name, contents) in &out.csv {
                    write_file(&dir.join(name), contents)?;
                }
            }
        }
        None => print!("{report}"),
    }
    Ok(out.outcome)
}

/// Caps rayon's pool at `OBSTRUCT_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("OBSTRUCT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("OBSTRUCT_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcomes_combine() {
        use Outcome::*;
        assert_eq!(Outcome::combine([Pass, Pass]), Pass);
        assert_eq!(Outcome::combine([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Outcome::combine([Inconclusive, Violation, Pass]), Violation);
        assert_eq!(Outcome::combine([]), Pass);
    }
}

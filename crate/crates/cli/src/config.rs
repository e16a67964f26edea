use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Expand,
    Entropy,
    Verify,
    Factor,
    Mme,
    Decomp,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Entropy => "entropy",
            Command::Verify => "verify",
            Command::Factor => "factor",
            Command::Mme => "mme",
            Command::Decomp => "decomp",
        }
    }
}

/// Where β comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SystemSpec {
    /// A literal accepted by `parse_beta`, expanded to `digits` digits.
    Beta { literal: String },
    ExpansionFile { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Prefix `ε`, core of match length 0, suffix a prefix of `w`.
    #[default]
    Beta,
    /// Every word is an obstruction; the core is `{ε}`.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompOp {
    Split,
    Coverage,
    Spec,
}

/// Everything a run depends on. Two runs with equal configs produce equal
/// reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub system: SystemSpec,
    /// Starting precision of the interval route, in bits.
    pub precision_bits: u32,
    /// Digits of the expansion of 1 computed before truncating.
    pub digits: usize,
    pub n_max: usize,
    /// Scale index `j`, for `ε = 2^-j`.
    pub depth: usize,
    pub tau_max: usize,
    /// Filtration level `M`.
    pub level: usize,
    pub enumeration_cap: usize,
    /// Longest cylinder in a measure table.
    pub measure_depth: usize,
    /// Lengths `n` of the empirical measures compared by `mme`.
    pub mme_lengths: Vec<usize>,
    pub scheme: SchemeKind,
    pub op: Option<DecompOp>,
    pub code_file: Option<PathBuf>,
    pub measure_file: Option<PathBuf>,
    pub words_file: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub emit_csv: bool,
}

impl RunConfig {
    /// Defaults for `command` on `system`.
    pub fn new(command: Command, system: SystemSpec) -> Self {
        RunConfig {
            command,
            system,
            precision_bits: 128,
            digits: 64,
            n_max: if command == Command::Entropy { 40 } else { 24 },
            depth: 0,
            tau_max: 8,
            level: 3,
            enumeration_cap: obstruct_core::symbolic::DEFAULT_ENUMERATION_CAP,
            measure_depth: if command == Command::Verify { 12 } else { 3 },
            mme_lengths: vec![250, 500, 1000, 2000],
            scheme: SchemeKind::Beta,
            op: None,
            code_file: None,
            measure_file: None,
            words_file: None,
            out_dir: None,
            emit_csv: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let caps = [
            ("precision", self.precision_bits as usize),
            ("digits", self.digits),
            ("nmax", self.n_max),
            ("tau-max", self.tau_max),
            ("enumeration cap", self.enumeration_cap),
            ("measure depth", self.measure_depth),
        ];
        if let Some((name, _)) = caps.iter().find(|(_, v)| *v == 0) {
            return Err(CliError::Config(format!("{name} must be positive")));
        }
        if self.mme_lengths.iter().any(|&n| n < self.measure_depth) {
            return Err(CliError::Config("every mme length must be at least the measure depth".into()));
        }
        match self.command {
            Command::Factor if self.code_file.is_none() => Err(CliError::Config("factor needs --code".into())),
            Command::Decomp if self.op.is_none() => Err(CliError::Config("decomp needs --op".into())),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&crate::read_file(path)?)
    }
}

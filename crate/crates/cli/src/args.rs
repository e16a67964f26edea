//! Command-line parsing into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Command, DecompOp, RunConfig, SchemeKind, SystemSpec};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "obstruct", version, about = "Beta-shift decompositions, counting checks and measures of maximal entropy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Expansion of 1 in base β, and the follower automaton.
    Expand(Common),
    /// Word counts and the entropy estimate.
    Entropy(Common),
    /// Every counting, Gibbs, mixing, coverage and gluing check.
    Verify(VerifyArgs),
    /// Sliding block code factor: image, induced decomposition, expansivity.
    Factor(FactorArgs),
    /// Parry and empirical measures of maximal entropy.
    Mme(MmeArgs),
    /// Splits, filtration coverage or gluing times of the decomposition.
    Decomp(DecompArgs),
    /// Runs a saved config file.
    Run {
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("system").required(true).args(["beta", "expansion_file"])))]
pub struct Common {
    /// β literal: `3/2`, `(1+sqrt(5))/2`, or `~1.7548776662` for an approximate value.
    #[arg(long)]
    pub beta: Option<String>,
    /// Digits of the expansion of 1, with optional `period=`, `tail=finite`, `beta=` headers.
    #[arg(long)]
    pub expansion_file: Option<PathBuf>,
    /// Starting precision in bits for non-exact β.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Digits of the expansion computed before truncating.
    #[arg(long)]
    pub digits: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Scale index j, for ε = 2^-j.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub tau_max: Option<usize>,
    /// Filtration level.
    #[arg(long = "M")]
    pub level: Option<usize>,
    #[arg(long)]
    pub enumeration_cap: Option<usize>,
    /// Longest cylinder kept in measure tables.
    #[arg(long)]
    pub measure_depth: Option<usize>,
    /// Output directory; the report goes to stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub emit_csv: bool,
    /// Also write the resolved config here.
    #[arg(long)]
    pub write_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "beta")]
    pub scheme: SchemeArg,
    /// Measure JSON to check in place of the Parry measure.
    #[arg(long)]
    pub measure: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Block code file, one `block -> symbol` rule per line.
    #[arg(long)]
    pub code: PathBuf,
}

#[derive(Debug, Args)]
pub struct MmeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Measure JSON compared against the Parry measure.
    #[arg(long)]
    pub measure: Option<PathBuf>,
    /// Lengths of the empirical measures, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct DecompArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub op: OpArg,
    #[arg(long, value_enum, default_value = "beta")]
    pub scheme: SchemeArg,
    /// Word file whose words are split.
    #[arg(long)]
    pub words: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SchemeArg {
    Beta,
    Degenerate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OpArg {
    Split,
    Coverage,
    Spec,
}

impl Common {
    fn config(&self, command: Command) -> RunConfig {
        let system = match (&self.beta, &self.expansion_file) {
            (Some(literal), _) => SystemSpec::Beta { literal: literal.clone() },
            (None, Some(path)) => SystemSpec::ExpansionFile { path: path.clone() },
            (None, None) => unreachable!("clap requires one of --beta, --expansion-file"),
        };
        let mut c = RunConfig::new(command, system);
        macro_rules! set {
            ($field:ident, $value:expr) => {
                if let Some(v) = $value {
                    c.$field = v;
                }
            };
        }
        set!(precision_bits, self.precision);
        set!(digits, self.digits);
        set!(n_max, self.nmax);
        set!(depth, self.depth);
        set!(tau_max, self.tau_max);
        set!(level, self.level);
        set!(enumeration_cap, self.enumeration_cap);
        set!(measure_depth, self.measure_depth);
        c.out_dir = self.out.clone();
        c.emit_csv = self.emit_csv;
        c
    }
}

fn scheme(s: SchemeArg) -> SchemeKind {
    match s {
        SchemeArg::Beta => SchemeKind::Beta,
        SchemeArg::Degenerate => SchemeKind::Degenerate,
    }
}

impl Cli {
    /// The config to run and, when requested, where to save it.
    pub fn into_config(self) -> Result<(RunConfig, Option<PathBuf>), CliError> {
        let (config, save) = match self.command {
            Sub::Expand(c) => (c.config(Command::Expand), c.write_config),
            Sub::Entropy(c) => (c.config(Command::Entropy), c.write_config),
            Sub::Verify(a) => {
                let mut c = a.common.config(Command::Verify);
                c.scheme = scheme(a.scheme);
                c.measure_file = a.measure;
                (c, a.common.write_config)
            }
            Sub::Factor(a) => {
                let mut c = a.common.config(Command::Factor);
                c.code_file = Some(a.code);
                (c, a.common.write_config)
            }
            Sub::Mme(a) => {
                let mut c = a.common.config(Command::Mme);
                c.measure_file = a.measure;
                if let Some(l) = a.lengths {
                    c.mme_lengths = l;
                }
                (c, a.common.write_config)
            }
            Sub::Decomp(a) => {
                let mut c = a.common.config(Command::Decomp);
                c.op = Some(match a.op {
                    OpArg::Split => DecompOp::Split,
                    OpArg::Coverage => DecompOp::Coverage,
                    OpArg::Spec => DecompOp::Spec,
                });
                c.scheme = scheme(a.scheme);
                c.words_file = a.words;
                (c, a.common.write_config)
            }
            Sub::Run { config } => (RunConfig::load(&config)?, None),
        };
        config.validate()?;
        Ok((config, save))
    }
}

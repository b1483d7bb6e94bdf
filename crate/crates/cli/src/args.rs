use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use daefix::convert::{EsSubstitution, Method};
use daefix::dae::Mode;

const EXIT_CODES: &str = "\
Exit codes:
  0  success: nonsingular System Jacobian, or conversion verified
  1  parse, usage or I/O error, failed self-check, or not a null vector
  2  System Jacobian singular and not fixed, or a forced step's condition rejected
  3  structurally ill posed, before or after conversion
  4  result rests on probabilistic zero tests only";

#[derive(Debug, Parser)]
#[command(
    name = "daefix",
    version,
    about = "Structural analysis of DAEs and conversion of identically singular ones",
    after_help = EXIT_CODES
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signature matrix, offsets, solution scheme and System Jacobian
    #[command(after_help = EXIT_CODES)]
    Analyze(Common),
    /// Apply LC and ES steps until the System Jacobian is nonsingular
    #[command(after_help = EXIT_CODES)]
    Fix(FixArgs),
    /// Apply one step with a given null vector and pivot
    #[command(after_help = EXIT_CODES)]
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// DAE in the text format
    pub path: PathBuf,
    /// Signature from formal occurrence or after simplification
    #[arg(long, value_enum, default_value_t = ModeArg::True)]
    pub mode: ModeArg,
    /// Random probes per zero test once symbolic simplification gives up
    #[arg(long, default_value_t = 8)]
    pub probe_budget: usize,
    /// Seed for probe points
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here; `-` prints it instead of the text report
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the resulting system in the text format
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixArgs {
    #[command(flatten)]
    pub common: Common,
    /// Maximum number of conversion steps [default: initial value + 1]
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Which derivatives ES replaces
    #[arg(long, value_enum, default_value_t = SubstitutionArg::Literal)]
    pub substitution: SubstitutionArg,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Null vector: JSON array of strings or numbers, or `[e1, e2, ...]`
    #[arg(long, allow_hyphen_values = true)]
    pub vector: String,
    /// Pivot index, 1-based
    #[arg(long)]
    pub pivot: usize,
    /// Which derivatives ES replaces
    #[arg(long, value_enum, default_value_t = SubstitutionArg::Literal)]
    pub substitution: SubstitutionArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Formal,
    True,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Formal => Mode::Formal,
            ModeArg::True => Mode::True,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SubstitutionArg {
    Literal,
    Full,
}

impl SubstitutionArg {
    pub fn name(self) -> &'static str {
        match self {
            SubstitutionArg::Literal => "literal",
            SubstitutionArg::Full => "full",
        }
    }
}

impl From<SubstitutionArg> for EsSubstitution {
    fn from(s: SubstitutionArg) -> EsSubstitution {
        match s {
            SubstitutionArg::Literal => EsSubstitution::Literal,
            SubstitutionArg::Full => EsSubstitution::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lc,
    Es,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Lc => Method::Lc,
            MethodArg::Es => Method::Es,
        }
    }
}

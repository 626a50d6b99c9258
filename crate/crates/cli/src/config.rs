//! Command-line definition and validated run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cssp::InstanceSpec;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cssp", version, about = "Spectral-norm column subset selection with certified bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select k columns and report the residual against the bound.
    Select(RunArgs),
    /// Report the closed-form bound for k.
    Bound(RunArgs),
    /// Run the identity checks on a small matrix.
    Verify(RunArgs),
    /// Write a generated instance as Matrix Market.
    Gen(GenArgs),
    /// Tabulate residual and bound over a range of k.
    Bench(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Matrix Market or headerless CSV file.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Generated instance, e.g. `hard:d=4,delta=1`, `powerlaw:n=64,d=64,s=2,seed=7`,
    /// `random:n=6,d=6,seed=1`.
    #[arg(long, value_name = "SPEC")]
    pub instance: Option<InstanceSpec>,
    /// Transpose the input after reading.
    #[arg(long)]
    pub transpose: bool,
    /// Number of columns (`bench`: largest k, default rank − 1).
    #[arg(short, long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_name = "SPEC")]
    pub instance: InstanceSpec,
    /// Output file; Matrix Market goes to standard output when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Root accuracy of the bisection.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads: a positive integer or `auto`.
    #[arg(long, default_value = "auto")]
    pub threads: Threads,
    /// Also report unsquared norms.
    #[arg(long)]
    pub sqrt: bool,
    /// Include wall time in the report (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Self::Fixed(n)),
            _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
        }
    }
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Select,
    Bound,
    Verify,
    Gen,
    Bench,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Select => "select",
            Self::Bound => "bound",
            Self::Verify => "verify",
            Self::Gen => "gen",
            Self::Bench => "bench",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    File { path: PathBuf, transpose: bool },
    Instance { spec: InstanceSpec, transpose: bool },
}

impl Source {
    pub fn label(&self) -> String {
        match self {
            Self::File { path, .. } => path.display().to_string(),
            Self::Instance { spec, .. } => spec.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: Source,
    pub k: Option<usize>,
    pub eps: f64,
    pub format: Format,
    pub threads: Threads,
    pub sqrt: bool,
    pub timing: bool,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, args) = match cli.command {
            Command::Gen(g) => {
                return Self::with_common(
                    CommandKind::Gen,
                    Source::Instance { spec: g.instance, transpose: false },
                    None,
                    g.output,
                    g.common,
                )
            }
            Command::Select(a) => (CommandKind::Select, a),
            Command::Bound(a) => (CommandKind::Bound, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Bench(a) => (CommandKind::Bench, a),
        };
        let source = match (args.input, args.instance) {
            (Some(path), None) => Source::File { path, transpose: args.transpose },
            (None, Some(spec)) => Source::Instance { spec, transpose: args.transpose },
            _ => return Err(CliError::Usage("exactly one of --input and --instance is required".into())),
        };
        if command != CommandKind::Bench && args.k.is_none() {
            return Err(CliError::Usage(format!("`{}` requires -k", command.name())));
        }
        Self::with_common(command, source, args.k, None, args.common)
    }

    fn with_common(
        command: CommandKind,
        source: Source,
        k: Option<usize>,
        output: Option<PathBuf>,
        c: CommonArgs,
    ) -> Result<Self, CliError> {
        if !(c.eps > 0.0 && c.eps.is_finite()) {
            return Err(CliError::Usage(format!("--eps must be positive, got {}", c.eps)));
        }
        Ok(Self {
            command,
            source,
            k,
            eps: c.eps,
            format: c.format,
            threads: c.threads,
            sqrt: c.sqrt,
            timing: c.timing,
            output,
        })
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "elkit", version, about = "Moments of |det(A - μ)| for the real elliptic ensemble")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Finite-N matrix kernel entries and their distance to the limit kernel.
    Kernel(Opts),
    /// Real correlation function at the points given by --x.
    Rho(Opts),
    /// Exact moments through the Pfaffian bridge or the closed form.
    MomentExact(Opts),
    /// Large-N prediction next to the exact value.
    MomentAsymptotic(Opts),
    /// Monte Carlo estimate next to the exact value and the prediction.
    MomentMc(Opts),
    /// Leading constants of the moment asymptotics.
    Constants(Opts),
    /// Raw matrix draws in the order the Monte Carlo estimators use them.
    Sample(Opts),
    /// Run verification suites.
    Verify(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::Kernel(o)
            | Command::Rho(o)
            | Command::MomentExact(o)
            | Command::MomentAsymptotic(o)
            | Command::MomentMc(o)
            | Command::Constants(o)
            | Command::Sample(o)
            | Command::Verify(o) => o,
        }
    }

    fn opts_mut(&mut self) -> &mut Opts {
        match self {
            Command::Kernel(o)
            | Command::Rho(o)
            | Command::MomentExact(o)
            | Command::MomentAsymptotic(o)
            | Command::MomentMc(o)
            | Command::Constants(o)
            | Command::Sample(o)
            | Command::Verify(o) => o,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Rho(_) => "rho",
            Command::MomentExact(_) => "moment-exact",
            Command::MomentAsymptotic(_) => "moment-asymptotic",
            Command::MomentMc(_) => "moment-mc",
            Command::Constants(_) => "constants",
            Command::Sample(_) => "sample",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Args)]
pub struct Opts {
    /// Non-Hermiticity parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Matrix sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Moment exponent.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu: Option<Vec<f64>>,
    /// First kernel arguments, or the points for `rho`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Second kernel arguments.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Independent random streams; also the number of batches for error bars.
    #[arg(long)]
    pub streams: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// File of `key = value` lines using the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Verification suite, or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    /// Largest N used by verification suites.
    #[arg(long)]
    pub max_n: Option<usize>,
}

impl Opts {
    /// Fill every unset field from `other`.
    fn or(self, other: Opts) -> Opts {
        Opts {
            tau: self.tau.or(other.tau),
            n: self.n.or(other.n),
            ell: self.ell.or(other.ell),
            mu: self.mu.or(other.mu),
            x: self.x.or(other.x),
            y: self.y.or(other.y),
            seed: self.seed.or(other.seed),
            samples: self.samples.or(other.samples),
            streams: self.streams.or(other.streams),
            rel_tol: self.rel_tol.or(other.rel_tol),
            abs_tol: self.abs_tol.or(other.abs_tol),
            output: self.output.or(other.output),
            format: self.format.or(other.format),
            config: self.config,
            suite: self.suite.or(other.suite),
            max_n: self.max_n.or(other.max_n),
        }
    }
}

/// Turn a config file into flag tokens so it goes through the same parser.
fn config_tokens(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut tokens = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(CliError::Usage(format!("{}:{}: config files cannot nest", path.display(), lineno + 1)));
        }
        tokens.push(format!("--{key}"));
        tokens.push(value.trim().to_string());
    }
    Ok(tokens)
}

/// Parse arguments, then layer flags over the config file over defaults.
pub fn parse<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut cmd = Cli::try_parse_from(argv).map_err(CliError::Clap)?.command;
    if let Some(path) = cmd.opts().config.clone() {
        let mut argv = vec!["elkit".to_string(), cmd.name().to_string()];
        argv.extend(config_tokens(&path)?);
        let from_file = Cli::try_parse_from(argv)
            .map_err(|e| {
                CliError::Usage(format!("in {}: {}", path.display(), e.to_string().lines().next().unwrap_or("")))
            })?
            .command;
        let merged = cmd.opts().clone().or(from_file.opts().clone());
        *cmd.opts_mut() = merged;
    }
    Ok(cmd)
}

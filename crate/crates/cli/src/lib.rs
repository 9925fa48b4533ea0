//! `fiberpair` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod config;
pub mod error;
mod output;

pub use config::RunConfig;
pub use error::CliError;

/// Crate version and file-format schema.
pub const VERSION_STRING: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)");

#[derive(Debug, Parser)]
#[command(
    name = "fiberpair",
    version = VERSION_STRING,
    about = "Photon-pair generation in tapered fibres: modes, joint spectra, rates and time-tag analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration (defaults apply when omitted)
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Config overrides: --section.key value (or --section.key=value)
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--SECTION.KEY VALUE"
    )]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective-index table of guided modes at one waist diameter
    Modes(Common),
    /// Phase-matching, pump and joint spectral intensity grids plus the Schmidt report
    Jsi(Common),
    /// Pair-rate bookkeeping under the configured loss budget
    Rates(Common),
    /// Time-tag analysis and simulation
    #[command(subcommand)]
    Tags(TagsCommand),
    /// Print the effective configuration as TOML
    Config(Common),
}

#[derive(Debug, Subcommand)]
pub enum TagsCommand {
    /// Start-stop coincidence histogram with peak/accidental analysis
    Coincidences(Common),
    /// Heralded autocorrelation versus herald separation
    G2h(Common),
    /// Seeded pulsed-source tag stream
    Simulate(Common),
    /// Fit D + bP + aP² to a power scan
    FitPower(Common),
}

/// Files written and a human-readable summary.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let overrides = config::parse_overrides(&common.overrides)?;
    RunConfig::load(common.config.as_deref(), &overrides)
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Modes(c) => commands::modes(&load(c)?),
        Command::Jsi(c) => commands::jsi(&load(c)?),
        Command::Rates(c) => commands::rates(&load(c)?),
        Command::Config(c) => Ok(Outcome {
            summary: vec![load(c)?.to_toml()],
            ..Outcome::default()
        }),
        Command::Tags(t) => match t {
            TagsCommand::Coincidences(c) => commands::coincidences(&load(c)?),
            TagsCommand::G2h(c) => commands::g2h(&load(c)?),
            TagsCommand::Simulate(c) => commands::simulate(&load(c)?),
            TagsCommand::FitPower(c) => commands::fit_power(&load(c)?),
        },
    }
}

/// Parses `args` (program name first), runs, reports, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                error::EXIT_CONFIG
            } else {
                error::EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            // a closed pipe (e.g. `| head`) is not an error for us
            let mut stdout = std::io::stdout().lock();
            let _ = out
                .summary
                .iter()
                .try_for_each(|line| writeln!(stdout, "{line}"))
                .and_then(|_| {
                    out.files
                        .iter()
                        .try_for_each(|f| writeln!(stdout, "wrote {}", f.display()))
                });
            error::EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

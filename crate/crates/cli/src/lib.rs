//! Command-line front end for `phimax`.
//!
//! Every subcommand writes one deterministic report (JSON, or CSV for sweeps)
//! and maps its outcome to an exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input error (malformed file or flags, violated precondition) |
//! | 2 | the report contains `Undecided` verdicts |
//! | 3 | a theorem violation, failed self-verification, or an unattainable construction |

pub mod commands;
pub mod expr;
pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] phimax::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use phimax::Error as E;
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Core(
                E::TheoremViolation(_) | E::InternalConsistency(_) | E::VerificationFailed(_) | E::NoAdmissiblePoint(_),
            ) => EXIT_VIOLATION,
            CliError::Core(_) => EXIT_INPUT,
        }
    }
}

const MINORANT_HELP: &str = "Quadratic minorant -a|x|^2 + <l, x> + c written as a,l1,...,ln,c";

#[derive(Debug, Parser)]
#[command(name = "phimax", version, about = "Minorants, subdifferentials, intersection-property decisions and minimax certification on sampled grids")]
pub struct Cli {
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Support,
    Subgrad,
    Eps,
    Conv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gap between a function and the envelope of its tight dictionary minorants.
    Envelope {
        file: PathBuf,
        #[arg(long = "fn")]
        function: String,
    },
    /// Membership of one minorant in the ε-subdifferential, or a dictionary search.
    Subdiff {
        file: PathBuf,
        #[arg(long = "fn")]
        function: String,
        /// Grid point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true, help = MINORANT_HELP)]
        phi: Option<String>,
    },
    /// Decides whether two strict sublevel sets are disjoint.
    Intersect {
        #[arg(long, allow_hyphen_values = true, help = MINORANT_HELP)]
        phi1: String,
        #[arg(long, allow_hyphen_values = true, help = MINORANT_HELP)]
        phi2: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Restrict to the closed ball of this radius around the origin.
        #[arg(long)]
        ball: Option<f64>,
        /// Slack below which a ball decision is left undecided.
        #[arg(long, default_value_t = phimax::intersection::DEFAULT_BALL_MARGIN)]
        margin: f64,
    },
    /// Trades an ε-subgradient at y for an exact subgradient nearby.
    Br {
        file: PathBuf,
        #[arg(long = "fn")]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, allow_hyphen_values = true, help = MINORANT_HELP)]
        phi: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Moves a full-space support pair to exact subgradients disjoint on a ball.
    Transfer {
        file: PathBuf,
        #[arg(long = "fn")]
        function: String,
        #[arg(long = "fn2")]
        function2: String,
        #[arg(long, allow_hyphen_values = true, help = MINORANT_HELP)]
        phi1: String,
        #[arg(long, allow_hyphen_values = true, help = MINORANT_HELP)]
        phi2: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Saddle values and a per-level witness table.
    Minimax {
        file: PathBuf,
        /// Levels lo:hi:step.
        #[arg(long, allow_hyphen_values = true)]
        alpha_sweep: String,
        /// Ball radius; only with --mode subgrad.
        #[arg(long)]
        ball: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Support)]
        mode: Mode,
        /// ε for --mode eps (defaults to the file parameter, then 0.1).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reproduces the worked example f = 2^x, g = -|x| + 2.
    PaperExample {
        /// Single ball radius; by default 1, 5 and 10 are run.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
    },
}

/// A finished report and the exit code it implies.
pub struct Output {
    pub text: String,
    pub code: i32,
}

/// Parses `args` (including the program name), runs the subcommand and
/// writes the report to `out` (or `--out`) and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    match commands::execute(&cli.command) {
        Ok(report) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &report.text),
                None => out.write_all(report.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write report: {e}");
                return EXIT_INPUT;
            }
            report.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nevlab::nochka::NochkaError;
use nevlab::smt::{picard_dimension_bound, uniqueness_threshold, SmtError, Tolerances, Verdict};
use serde_json::json;

mod commands;
mod config;
mod output;
mod svg;

use config::{ConfigError, Overrides};
use output::{Artifacts, RunInfo};

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "nevlab", version, about = "Difference Nevanlinna theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of radii in the grid.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Overrides the quadrature points per circle.
    #[arg(long, global = true)]
    quadrature: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Default,
}

impl Profile {
    fn tolerances(self) -> Tolerances {
        match self {
            Profile::Strict => Tolerances::strict(),
            Profile::Default => Tolerances::default(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Profile::Strict => "strict",
            Profile::Default => "default",
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check N-subgeneral position of the hyperplanes.
    CheckPosition,
    /// Solve and verify Nochka weights.
    Nochka,
    /// Casorati and Wronskian nondegeneracy, and the C(fB) = det B C(f) check.
    Casorati,
    /// Characteristic, counting and proximity functions on the grid.
    Tchar,
    /// First main theorem residual oscillation.
    FmtCheck,
    /// Logarithmic difference estimate.
    Logdiff,
    /// Second main theorem margin with the Casorati determinant.
    Smt,
    /// Second main theorem margin with the Wronskian determinant.
    Chen,
    /// Defect relation.
    Defects,
    /// Borel partition of a vanishing sum.
    Partition,
    /// Picard-type dimension bound for shift-invariant preimages.
    DimBound {
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long)]
        p: usize,
    },
}

/// The config-driven commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckPosition,
    Nochka,
    Casorati,
    Tchar,
    FmtCheck,
    Logdiff,
    Smt,
    Chen,
    Defects,
    Partition,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckPosition => "check-position",
            Command::Nochka => "nochka",
            Command::Casorati => "casorati",
            Command::Tchar => "tchar",
            Command::FmtCheck => "fmt-check",
            Command::Logdiff => "logdiff",
            Command::Smt => "smt",
            Command::Chen => "chen",
            Command::Defects => "defects",
            Command::Partition => "partition",
        }
    }

    pub fn needs_mapping(self) -> bool {
        matches!(
            self,
            Command::Casorati | Command::Tchar | Command::FmtCheck | Command::Smt | Command::Chen | Command::Defects
        )
    }

    pub fn needs_hyperplanes(self) -> bool {
        matches!(
            self,
            Command::CheckPosition
                | Command::Nochka
                | Command::FmtCheck
                | Command::Smt
                | Command::Chen
                | Command::Defects
        )
    }

    /// `q > 2N - n + 1` and subgeneral position.
    pub fn needs_theorem_hypotheses(self) -> bool {
        matches!(self, Command::Nochka | Command::Smt | Command::Chen | Command::Defects)
    }
}

enum Failure {
    Invalid(String),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// Library refusals that mean the input violates a hypothesis, as opposed to
/// a numerical failure.
fn is_precondition(e: &anyhow::Error) -> bool {
    if let Some(s) = e.downcast_ref::<SmtError>() {
        return matches!(
            s,
            SmtError::Position { .. }
                | SmtError::TooFewPlanes { .. }
                | SmtError::DimensionMismatch { .. }
                | SmtError::Degenerate(_)
                | SmtError::Hyperorder(_)
                | SmtError::Range(_)
                | SmtError::ZeroFunction(_)
        );
    }
    matches!(
        e.downcast_ref::<NochkaError>(),
        Some(NochkaError::NotSubgeneral { .. } | NochkaError::TooFewPlanes { .. })
    )
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        if is_precondition(&e) {
            Failure::Invalid(format!("{e:#}"))
        } else {
            Failure::Runtime(e)
        }
    }
}

fn dim_bound(n: usize, big_n: usize, p: usize, common: &Common) -> Result<Verdict, Failure> {
    let bound = picard_dimension_bound(n, p, big_n).map_err(|e| Failure::Invalid(e.to_string()))?;
    let _ = writeln!(std::io::stdout(), "{bound}");
    if let Some(out) = &common.out {
        let threshold = uniqueness_threshold(n, big_n).map_err(|e| Failure::Invalid(e.to_string()))?;
        let report = json!({
            "command": "dim-bound",
            "n": n, "N": big_n, "p": p,
            "bound": bound,
            "uniqueness_threshold": nevlab::nochka::fmt_rational(&threshold),
        });
        let mut params = toml::Table::new();
        params.insert("n".into(), (n as i64).into());
        params.insert("N".into(), (big_n as i64).into());
        params.insert("p".into(), (p as i64).into());
        let info = RunInfo {
            command: "dim-bound",
            verdict: "pass",
            tolerance_profile: common.tolerance_profile.name(),
            seed: None,
            config_bytes: None,
            config: None,
            parameters: Some(&params),
        };
        output::write_all(
            out,
            &info,
            &Artifacts {
                tables: Vec::new(),
                plots: Vec::new(),
                report,
            },
        )?;
    }
    Ok(Verdict::Pass)
}

fn run(cli: Cli) -> Result<Verdict, Failure> {
    let common = &cli.common;
    let command = match cli.command {
        Cmd::DimBound { n, big_n, p } => return dim_bound(n, big_n, p, common),
        Cmd::CheckPosition => Command::CheckPosition,
        Cmd::Nochka => Command::Nochka,
        Cmd::Casorati => Command::Casorati,
        Cmd::Tchar => Command::Tchar,
        Cmd::FmtCheck => Command::FmtCheck,
        Cmd::Logdiff => Command::Logdiff,
        Cmd::Smt => Command::Smt,
        Cmd::Chen => Command::Chen,
        Cmd::Defects => Command::Defects,
        Cmd::Partition => Command::Partition,
    };
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Invalid(format!("`{}` needs --config", command.name())))?;
    let bytes = fs::read(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let source =
        String::from_utf8(bytes.clone()).map_err(|_| Failure::Invalid(format!("{}: not UTF-8", path.display())))?;
    let overrides = Overrides {
        seed: common.seed,
        grid_points: common.grid_points,
        quadrature: common.quadrature,
    };
    let cfg = config::load(&path.display().to_string(), &source, command, &overrides)?;
    let tol = common.tolerance_profile.tolerances();

    let outcome = match command {
        Command::CheckPosition => commands::check_position(&cfg),
        Command::Nochka => commands::nochka(&cfg),
        Command::Casorati => commands::casorati(&cfg),
        Command::Tchar => commands::tchar(&cfg),
        Command::FmtCheck => commands::fmt_check(&cfg, &tol),
        Command::Logdiff => commands::logdiff(&cfg, &tol),
        Command::Smt => commands::smt(&cfg, &tol),
        Command::Chen => commands::chen(&cfg, &tol),
        Command::Defects => commands::defects(&cfg, &tol),
        Command::Partition => commands::partition(&cfg),
    }?;

    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("nevlab-out"));
    let verdict = outcome.verdict.to_string();
    let info = RunInfo {
        command: command.name(),
        verdict: &verdict,
        tolerance_profile: common.tolerance_profile.name(),
        seed: Some(cfg.seed),
        config_bytes: Some(&bytes),
        config: Some(&cfg.raw),
        parameters: None,
    };
    let written = output::write_all(&out, &info, &outcome.artifacts).context("writing reports")?;
    // a closed pipe on stdout is not an error for a report
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}: {} ({})", command.name(), outcome.verdict, outcome.headline);
    for p in written {
        let _ = writeln!(stdout, "  wrote {}", p.display());
    }
    Ok(outcome.verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

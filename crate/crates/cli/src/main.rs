//! fillin-lab: command-line front end for fillin-core.

mod commands;
mod input;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fillin_core::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use report::{Cell, Outcome};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(name = "fillin-lab", version, about = "Fill-in constructions, flows and theta bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Output format; defaults from the file extension, else per command.
    #[arg(long, value_enum)]
    #[serde(skip)]
    format: Option<Format>,
    /// Sweep one numeric flag over a grid `A:B:STEP` or `v1,v2,...`.
    #[arg(long, num_args = 2, value_names = ["PARAM", "GRID"], allow_hyphen_values = true)]
    #[serde(skip)]
    sweep: Option<Vec<String>>,
    /// Worker threads for sweeps (overridden by FILLIN_LAB_WORKERS).
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Schwarzschild neck with outer mean curvature H and inner h; optional rescaling onto --metric.
    #[command(name = "neck-schwarzschild", args_override_self = true, allow_negative_numbers = true)]
    NeckSchwarzschild(commands::NeckSchwarzschild),
    /// Cap neck for (n, lambda, theta, eps).
    #[command(name = "neck-cap", args_override_self = true, allow_negative_numbers = true)]
    NeckCap(commands::NeckCap),
    /// Isotopy neck along a metric path.
    #[command(name = "neck-isotopy", args_override_self = true, allow_negative_numbers = true)]
    NeckIsotopy(commands::NeckIsotopy),
    /// Quasi-spherical flow with constant initial lapse.
    #[command(name = "flow", args_override_self = true, allow_negative_numbers = true)]
    Flow(commands::Flow),
    /// Mass bound and verdict for a path and constant initial lapse.
    #[command(name = "mass-bound", args_override_self = true, allow_negative_numbers = true)]
    MassBound(commands::MassBound),
    /// Threshold value H0(n, eps, s0).
    #[command(name = "h0", args_override_self = true, allow_negative_numbers = true)]
    H0(commands::H0),
    /// Non-existence test for NNSC fill-ins of Bartnik data.
    #[command(name = "nnsc-test", args_override_self = true, allow_negative_numbers = true)]
    NnscTest(commands::NnscTest),
    /// Closed-form theta for n = 2, 3.
    #[command(name = "theta-closed", args_override_self = true, allow_negative_numbers = true)]
    ThetaClosed(commands::ThetaClosed),
    /// Decay envelope and iterates above H0.
    #[command(name = "theta-decay", args_override_self = true, allow_negative_numbers = true)]
    ThetaDecay(commands::ThetaDecay),
    /// Lower bound on theta from min R and max H, or from lambda1 of --metric.
    #[command(name = "theta-lower", args_override_self = true, allow_negative_numbers = true)]
    ThetaLower(commands::ThetaLower),
    /// First eigenpair of -Lap + R/2.
    #[command(name = "lambda1", args_override_self = true, allow_negative_numbers = true)]
    Lambda1(commands::Lambda1),
    /// Build, mollify or flatten a metric path and report its norms.
    #[command(name = "path-build", args_override_self = true, allow_negative_numbers = true)]
    PathBuild(commands::PathBuild),
    /// Run the acceptance battery.
    #[command(name = "validate", args_override_self = true, allow_negative_numbers = true)]
    Validate(commands::Validate),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::NeckSchwarzschild(_) => "neck-schwarzschild",
            Command::NeckCap(_) => "neck-cap",
            Command::NeckIsotopy(_) => "neck-isotopy",
            Command::Flow(_) => "flow",
            Command::MassBound(_) => "mass-bound",
            Command::H0(_) => "h0",
            Command::NnscTest(_) => "nnsc-test",
            Command::ThetaClosed(_) => "theta-closed",
            Command::ThetaDecay(_) => "theta-decay",
            Command::ThetaLower(_) => "theta-lower",
            Command::Lambda1(_) => "lambda1",
            Command::PathBuild(_) => "path-build",
            Command::Validate(_) => "validate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::NeckSchwarzschild(a) => &a.common,
            Command::NeckCap(a) => &a.common,
            Command::NeckIsotopy(a) => &a.common,
            Command::Flow(a) => &a.common,
            Command::MassBound(a) => &a.common,
            Command::H0(a) => &a.common,
            Command::NnscTest(a) => &a.common,
            Command::ThetaClosed(a) => &a.common,
            Command::ThetaDecay(a) => &a.common,
            Command::ThetaLower(a) => &a.common,
            Command::Lambda1(a) => &a.common,
            Command::PathBuild(a) => &a.common,
            Command::Validate(a) => &a.common,
        }
    }

    fn run(&self) -> Result<Outcome, Error> {
        match self {
            Command::NeckSchwarzschild(a) => a.run(),
            Command::NeckCap(a) => a.run(),
            Command::NeckIsotopy(a) => a.run(),
            Command::Flow(a) => a.run(),
            Command::MassBound(a) => a.run(),
            Command::H0(a) => a.run(),
            Command::NnscTest(a) => a.run(),
            Command::ThetaClosed(a) => a.run(),
            Command::ThetaDecay(a) => a.run(),
            Command::ThetaLower(a) => a.run(),
            Command::Lambda1(a) => a.run(),
            Command::PathBuild(a) => a.run(),
            Command::Validate(a) => a.run(),
        }
    }

    fn seed(&self) -> u64 {
        match self {
            Command::Validate(a) => a.seed,
            _ => DEFAULT_SEED,
        }
    }
}

enum Failure {
    Usage(String),
    Core(Error),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical { .. } => 3,
        Error::Io(_) => 74,
        _ => 2,
    }
}

fn format_for(common: &Common, default: Format) -> Format {
    if let Some(f) = common.format {
        return f;
    }
    match common.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some("txt") => Format::Text,
        _ => default,
    }
}

fn workers(common: &Common) -> usize {
    std::env::var("FILLIN_LAB_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|w| *w > 0)
        .or(common.workers)
        .unwrap_or(0)
}

fn render_single(cmd: &Command, o: Outcome) -> Result<String, Failure> {
    let common = cmd.common();
    let default = if o.text.is_some() { Format::Text } else { Format::Json };
    match format_for(common, default) {
        Format::Text => match o.text {
            Some(t) => Ok(t),
            None => Err(Failure::Usage(format!("{} has no text output; use --format json", cmd.name()))),
        },
        Format::Csv => {
            if let Some(c) = o.csv {
                Ok(c)
            } else if !o.summary.is_empty() {
                Ok(report::summary_csv(None, &[(None, o.summary)]))
            } else {
                Err(Failure::Usage(format!("{} has no CSV output; use --format json", cmd.name())))
            }
        }
        Format::Json => {
            let env = report::envelope(
                cmd.name(),
                report::value(cmd),
                cmd.seed(),
                vec![("tolerances", o.tolerances), ("grid", o.grid), ("result", o.result)],
            );
            Ok(report::to_json(&env)?)
        }
    }
}

/// Re-parses argv with the sweep removed and `--PARAM value` appended.
fn point_args(argv: &[String], param: &str, v: f64) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len() + 2);
    let mut skip = 0;
    for a in argv {
        if skip > 0 {
            skip -= 1;
            continue;
        }
        if a == "--sweep" {
            skip = 2;
            continue;
        }
        out.push(a.clone());
    }
    out.push(format!("--{param}"));
    out.push(format!("{v}"));
    out
}

fn run_sweep(cmd: &Command, argv: &[String], param: &str, grid_spec: &str) -> Result<String, Failure> {
    let grid = input::parse_grid(grid_spec)?;
    let points: Vec<Command> = grid
        .iter()
        .map(|v| {
            Cli::try_parse_from(point_args(argv, param, *v))
                .map(|c| c.command)
                .map_err(|e| Failure::Usage(format!("cannot sweep `{param}`: {}", e.kind())))
        })
        .collect::<Result<_, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(cmd.common()))
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<Result<Outcome, Error>> = pool.install(|| points.par_iter().map(|p| p.run()).collect());
    let mut rows: Vec<report::SummaryRow> = Vec::with_capacity(grid.len());
    let mut tolerances = Value::Null;
    let mut grid_info = Value::Null;
    for (v, r) in grid.iter().zip(results) {
        let o = r.map_err(|e| {
            eprintln!("sweep point {param} = {v}: {e}");
            Failure::Core(e)
        })?;
        if tolerances.is_null() {
            tolerances = o.tolerances;
            grid_info = o.grid;
        }
        rows.push((Some(*v), o.summary));
    }
    match format_for(cmd.common(), Format::Csv) {
        Format::Csv | Format::Text => Ok(report::summary_csv(Some(param), &rows)),
        Format::Json => {
            let env = report::envelope(
                cmd.name(),
                report::value(cmd),
                cmd.seed(),
                vec![
                    ("sweep", serde_json::json!({ "parameter": param, "grid": grid })),
                    ("tolerances", tolerances),
                    ("grid", grid_info),
                    ("result", report::summary_rows_json(param, &rows)),
                ],
            );
            Ok(report::to_json(&env)?)
        }
    }
}

fn execute(cli: Cli, argv: &[String]) -> Result<(), Failure> {
    let cmd = cli.command;
    let common = cmd.common().clone();
    let text = match &common.sweep {
        Some(sw) => run_sweep(&cmd, argv, &sw[0], &sw[1])?,
        None => {
            let o = cmd.run()?;
            let failed = match &cmd {
                Command::Validate(_) => o.summary.iter().any(|(k, c)| *k == "pass" && matches!(c, Cell::Text(t) if t == "false")),
                _ => false,
            };
            let text = render_single(&cmd, o)?;
            if failed {
                report::emit(&text, common.out.as_deref())?;
                return Err(Failure::Validation("acceptance battery has failing rows".into()));
            }
            text
        }
    };
    report::emit(&text, common.out.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(64)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Validation(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}

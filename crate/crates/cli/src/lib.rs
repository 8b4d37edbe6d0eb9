//! Command-line front end: `run`, `list`, and `calibrate`.
//!
//! Exit codes: 0 when every threshold passes, 2 when a threshold fails, 1 on
//! any usage, configuration, or execution error.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavekin::kinetics::{critical_scale, Calibration, KineticParams, Mode};
use wavekin::scenarios::list_scenarios;
use wavekin::run_scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_THRESHOLD: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wavekin", version, about = "Kinetic simulations of wave-driven particle creation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in scenario or a scenario file and write its outputs.
    Run(RunConfig),
    /// List the built-in scenarios.
    List {
        /// Print an annotated scenario file instead.
        #[arg(long)]
        template: bool,
    },
    /// Complete a set of kinetic constants from the calibration identities.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Scenario name or path to a TOML scenario file.
    pub target: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: runs/<scenario name>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Set a scenario field, e.g. `t_end=80` or `thresholds.born_deviation.max=0.1`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Print every computed statistic.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Photon,
    Matter,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("free").required(true).multiple(true).args(["tau", "gamma"])))]
pub struct CalibrateArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub omega: f64,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mean intensity ⟨E²⟩ for the critical disturbance size.
    #[arg(long)]
    pub mean_intensity: Option<f64>,
}

/// Parses `args` (program name first) and executes the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(cfg) => cmd_run(&cfg, out),
        Command::List { template } => cmd_list(template, out),
        Command::Calibrate(args) => cmd_calibrate(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> CmdResult {
    let scenario = config::resolve(&cfg.target, &cfg.overrides, cfg.seed)?;
    let dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(&scenario.name));
    let bundle = run_scenario(&scenario)?;
    bundle.write(&dir)?;
    writeln!(out, "{} (seed {}) -> {}", scenario.name, scenario.seed, dir.display())?;
    if cfg.verbose > 0 {
        for (name, value) in &bundle.statistics {
            writeln!(out, "  {name} = {value}")?;
        }
    }
    for (name, o) in &bundle.outcomes {
        let bound = match (o.min, o.max) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi}"),
            (None, None) => String::new(),
        };
        let verdict = if o.passed { "pass" } else { "FAIL" };
        writeln!(out, "  {verdict} {name} = {} ({bound})", o.value)?;
    }
    Ok(if bundle.passed() { EXIT_OK } else { EXIT_THRESHOLD })
}

pub fn cmd_list(template: bool, out: &mut dyn Write) -> CmdResult {
    let scenarios = list_scenarios();
    if template {
        write!(out, "{}\n{}", config::TEMPLATE_HEADER, config::to_toml(&scenarios[0]))?;
        return Ok(EXIT_OK);
    }
    let width = scenarios.iter().map(|s| s.name.len()).max().unwrap_or(0);
    for s in &scenarios {
        writeln!(out, "{:width$}  {}", s.name, s.description)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> CmdResult {
    let mode = match args.mode {
        ModeArg::Photon => Mode::Photon,
        ModeArg::Matter => Mode::Matter,
    };
    let params = match (args.tau, args.gamma) {
        (Some(tau), Some(gamma)) => KineticParams::from_parts(mode, args.omega, tau, gamma)?,
        (Some(tau), None) => KineticParams::new(mode, args.omega, Calibration::Tau(tau))?,
        (None, Some(gamma)) => KineticParams::new(mode, args.omega, Calibration::Gamma(gamma))?,
        (None, None) => unreachable!("clap requires tau or gamma"),
    };
    let identity = match mode {
        Mode::Photon => "4*pi*gamma*tau*omega",
        Mode::Matter => "gamma*tau*omega",
    };
    writeln!(out, "# {identity} = {}", params.calibration_product())?;
    write!(out, "{}", toml::to_string(&params)?)?;
    if let Some(w) = args.mean_intensity {
        writeln!(out, "critical_scale = {:?}", critical_scale(w, params.omega())?)?;
    }
    Ok(EXIT_OK)
}

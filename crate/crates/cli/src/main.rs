//! `qising`: command-line front end for the local quantum Ising laboratory.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{CmdError, Outcome};
use config::{DiagramFormat, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "qising", version, about = "Causal nets, dynamics and common causes in the local quantum Ising model")]
struct Cli {
    /// TOML or JSON configuration, or a JSON report to re-run.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generator relations, dimension law, Haag duality and local primitive causality.
    VerifyNet,
    /// Noncommuting common cause localized in the weak past of the two events.
    FindCc,
    /// Screening by {(1 +- U_0)/2} across a grid of dynamics.
    U0Sweep,
    /// Heuristic search for a commuting common cause.
    SearchCommuting,
    /// Ground-state commutator of the oscillator position (CSV on stdout).
    Oscillator,
    /// Past regions of the two events, drawn as text or SVG.
    Regions {
        #[arg(long, value_enum)]
        format: Option<DiagramFormat>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyNet => "verify-net",
            Command::FindCc => "find-cc",
            Command::U0Sweep => "u0-sweep",
            Command::SearchCommuting => "search-commuting",
            Command::Oscillator => "oscillator",
            Command::Regions { .. } => "regions",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(parallel) = cli.parallel {
        cfg.parallel = parallel;
    }
    if let Command::Regions { format: Some(f) } = &cli.command {
        cfg.regions.format = *f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: &Command, cfg: &RunConfig) -> Result<Outcome, CmdError> {
    match cmd {
        Command::VerifyNet => commands::verify_net(cfg),
        Command::FindCc => commands::find_cc(cfg),
        Command::U0Sweep => commands::u0_sweep(cfg),
        Command::SearchCommuting => commands::search_commuting(cfg),
        Command::Oscillator => commands::oscillator(cfg),
        Command::Regions { .. } => commands::regions(cfg, cfg.regions.format),
    }
}

fn write_report(path: &Option<PathBuf>, report: &serde_json::Value) -> Result<(), String> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(report).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QISING_LOG", "warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("qising {name}: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let (report, primary, code) = match run(&cli.command, &cfg) {
        Ok(out) => {
            let report = json!({
                "command": name,
                "passed": out.passed,
                "seed": cfg.seed,
                "config": cfg,
                "result": out.result,
            });
            (report, out.primary, if out.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("qising {name}: {e}");
            let report = json!({
                "command": name,
                "passed": false,
                "seed": cfg.seed,
                "config": cfg,
                "error": e.to_json(),
            });
            (report, None, e.exit_code())
        }
    };
    if let Err(e) = write_report(&cli.json, &report) {
        eprintln!("qising {name}: {e}");
        return ExitCode::from(2);
    }
    let text = match primary {
        Some(text) => text,
        None => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("qising {name}: cannot write output: {e}");
            ExitCode::from(2)
        }
        _ => ExitCode::from(code),
    }
}

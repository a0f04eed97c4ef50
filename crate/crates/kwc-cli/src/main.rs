//! `kwc` — experiment harness for the KWC energy library.
//!
//! Exit codes: 0 pass, 2 property violation, 3 configuration error.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kwc", version, about = "KWC energy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output].dir; default "out")
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config's `seed`; default 0)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Recovery-sequence energies across the epsilon schedule vs the limit
    GammaCheck(CommonArgs),
    /// Relaxed jump cost sigma(r) against the closed form
    SigmaTable(CommonArgs),
    /// TV vs jump-aware TV minimizers on staircase signals
    Staircase(CommonArgs),
    /// Sliced-graph metric counterexamples (Cantor annuli, radial bump)
    MetricDemo(CommonArgs),
    /// Profile tail bound over (c, delta) grids
    ElpfCheck(CommonArgs),
    /// Alternating minimization on a signal or image
    Denoise(CommonArgs),
}

/// Outcome of a command beyond hard errors.
pub enum Outcome {
    Pass,
    PropertyViolation(String),
}

pub struct Ctx {
    pub cfg: config::ExperimentConfig,
    pub cfg_hash: String,
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
}

fn prepare(args: &CommonArgs) -> anyhow::Result<Ctx> {
    let (cfg, text) = config::ExperimentConfig::load(&args.config)?;
    let cfg_hash = report::config_hash(&text);
    let base_dir = args
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    Ok(Ctx {
        cfg,
        cfg_hash,
        base_dir,
        out_dir,
        seed,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::GammaCheck(a) => ("gamma-check", a),
        Command::SigmaTable(a) => ("sigma-table", a),
        Command::Staircase(a) => ("staircase", a),
        Command::MetricDemo(a) => ("metric-demo", a),
        Command::ElpfCheck(a) => ("elpf-check", a),
        Command::Denoise(a) => ("denoise", a),
    };
    let ctx = match prepare(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kwc {name}: configuration error: {e:#}");
            return ExitCode::from(3);
        }
    };
    let result = match &cli.command {
        Command::GammaCheck(_) => commands::gamma_check::run(&ctx),
        Command::SigmaTable(_) => commands::sigma_table::run(&ctx),
        Command::Staircase(_) => commands::staircase::run(&ctx),
        Command::MetricDemo(_) => commands::metric_demo::run(&ctx),
        Command::ElpfCheck(_) => commands::elpf_check::run(&ctx),
        Command::Denoise(_) => commands::denoise::run(&ctx),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyViolation(msg)) => {
            eprintln!("kwc {name}: property violation: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            // invalid fixtures and missing sections are configuration errors
            let is_config = e.downcast_ref::<kwc_core::Error>().is_none_or(|k| {
                matches!(
                    k,
                    kwc_core::Error::InvalidArgument(_) | kwc_core::Error::Parse(_)
                )
            });
            if is_config {
                eprintln!("kwc {name}: configuration error: {e:#}");
                ExitCode::from(3)
            } else {
                eprintln!("kwc {name}: error: {e:#}");
                ExitCode::FAILURE
            }
        }
    }
}

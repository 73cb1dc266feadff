use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cogrelay_cli::config::{load_config, parse_grid, Overrides};
use cogrelay_cli::experiments::{run_experiment, write_atomically, Experiment};

#[derive(Parser)]
#[command(name = "cogrelay", version, about = "Underlay two-way relaying experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability at BS1 over the SIR grid, with analytic bounds.
    OutageBs(Common),
    /// Outage probability at SU1 over the SIR grid, with the closed-form bound.
    OutageSu(Common),
    /// Optimal- and fixed-power rates over the SIR grid.
    Rate(Common),
    /// Water level and closed-form constraint residuals.
    WaterLevel(Common),
    /// Oracle and invariant checks; exits nonzero if any gating check fails.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; defaults to the config's `output` key.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Average SIR grid as LO:STEP:HI in dB.
    #[arg(long, value_name = "LO:STEP:HI", allow_hyphen_values = true)]
    sir_db: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    cci_db: Option<f64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: Cli) -> Result<bool> {
    let (exp, args) = match cli.command {
        Command::OutageBs(a) => (Experiment::OutageBs, a),
        Command::OutageSu(a) => (Experiment::OutageSu, a),
        Command::Rate(a) => (Experiment::Rate, a),
        Command::WaterLevel(a) => (Experiment::WaterLevel, a),
        Command::Validate(a) => (Experiment::Validate, a),
    };
    let sir_grid_db = match &args.sir_db {
        Some(s) => Some(parse_grid(s).map_err(|e| anyhow::anyhow!("--sir-db: {e}"))?),
        None => None,
    };
    let overrides =
        Overrides { seed: args.seed, trials: args.trials, sir_grid_db, w_db: args.w_db, cci_db: args.cci_db };
    let cfg = load_config(&args.config, &overrides)?;
    let out = match args.out.or_else(|| cfg.output.clone()) {
        Some(p) => p,
        None => bail!("no output path: pass --out or set `output` in the config"),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let report = pool.install(|| run_experiment(exp, &cfg))?;
    write_atomically(&out, &report.csv)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed; see the output table");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

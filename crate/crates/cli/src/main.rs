use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coopcache_core::experiment::{cmd_duration, cmd_fig1, cmd_optimize, cmd_sweep, ExperimentConfig};
use coopcache_core::Error;

/// Cooperative caching experiments for delay-tolerant networks.
///
/// Settings come from built-in desk-scale defaults, then the `--config`
/// file, then flags. CSV goes to `--out` (or the config's `output`, or
/// stdout); the summary goes to stderr. Set RUST_LOG for progress logs.
#[derive(Debug, Parser)]
#[command(name = "coopcache", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// CSV destination; overrides the config.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Zipf(1) over 10^4 files, K = 100, 10^4 users.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Optimal allocation: rank,p,q,scheme
    Optimize,
    /// Miss rate vs lambda*T per scheme: scheme,lambda_t,analytic_miss,empirical_miss,requests,seed
    Sweep,
    /// Optimal vs pushed allocation: rank,q_optimal,q_empirical
    Fig1,
    /// Duration-limited miss rate: rank,p,q,rate,prob_miss,method,t0,alpha
    Duration,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.paper_scale {
        cfg.apply_paper_scale();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = resolve(cli)?;
    log::info!("running {:?} with seed {}", cli.command, cfg.seed);

    // Buffer so a failed run never leaves a truncated file behind.
    let mut buf = Vec::new();
    let summary = match cli.command {
        Command::Optimize => cmd_optimize(&cfg, &mut buf)?.to_string(),
        Command::Sweep => format!("{} rows", cmd_sweep(&cfg, &mut buf)?.len()),
        Command::Fig1 => cmd_fig1(&cfg, &mut buf)?.to_string(),
        Command::Duration => cmd_duration(&cfg, &mut buf)?.to_string(),
    };

    match &cfg.output {
        Some(path) => std::fs::write(path, &buf)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&buf)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Usage(format!("cannot write stdout: {e}")))?;
        }
    }
    eprintln!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

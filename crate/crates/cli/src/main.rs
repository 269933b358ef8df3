use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sks::{load_config, run, CliError, Mode};

/// Ensemble simulator for the stochastic Keller-Segel system.
#[derive(Debug, Parser)]
#[command(name = "sks", version)]
struct Args {
    /// simulate, picard, probe-holder, probe-equicontinuity or validate
    mode: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides ensemble.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn pool() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SKS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("SKS_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    pool()?;
    let mode: Mode = args.mode.parse()?;
    let mut cfg = load_config(mode, &args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
        cfg.params.noise.seed = s;
    }
    if let Some(o) = args.out {
        cfg.out_dir = o;
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let summary = run(&cfg)?;
    if summary.blown > 0 {
        eprintln!("{} of {} members blew up", summary.blown, cfg.members);
    }
    for f in &summary.files {
        if !f.starts_with("paths/") {
            println!("{}", cfg.out_dir.join(f).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sks: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

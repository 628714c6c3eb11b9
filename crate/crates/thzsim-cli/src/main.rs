//! thzsim: batch front-end for the 300 GHz channel toolkit.
//!
//! One JSON config per run, explicit seeds, deterministic artifacts:
//! identical config and seed produce byte-identical outputs, recorded
//! in a checksummed manifest. Exit codes: 0 success, 2 config error,
//! 3 numerical-validation failure.

mod config;
mod manifest;
mod modes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::manifest::ArtifactSink;

#[derive(Parser)]
#[command(
    name = "thzsim",
    version,
    about = "300 GHz short-range channel simulation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override config keys: --set seed_count=100 --set preset.name=corridor
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (default: config basename, or $THZSIM_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for ensemble fan-out (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario of any mode.
    Run(RunArgs),
    /// Generate channel realizations (CSV + JSON envelope per seed).
    QdGen(RunArgs),
    /// Ensemble statistics: PDP, cluster CDFs, delay spreads.
    QdStats(RunArgs),
    /// Multi-beam MIMO capacity with and without reflecting surfaces.
    MimoCap(RunArgs),
    /// Human-body-shadowing fading series from point-cloud frames.
    HbsRun(RunArgs),
    /// Fading series plus Doppler spectrogram.
    HbsDoppler(RunArgs),
    /// Numerical validation suite (no config needed).
    Validate {
        /// Output directory for validation.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn out_dir_for(explicit: Option<PathBuf>, config_path: Option<&PathBuf>) -> PathBuf {
    if let Some(o) = explicit {
        return o;
    }
    if let Ok(env) = std::env::var("THZSIM_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    match config_path {
        Some(p) => {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
            PathBuf::from(format!("{stem}_out"))
        }
        None => PathBuf::from("thzsim_out"),
    }
}

#[cfg(feature = "parallel")]
fn with_jobs<T>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match jobs {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T>(_jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    f()
}

fn run_mode(expected: Option<&str>, args: RunArgs) -> ExitCode {
    let (config, canonical) = match config::load(&args.config, &args.overrides) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = modes::ensure_mode_matches(expected, &config) {
        eprintln!("config error: {e:#}");
        return ExitCode::from(2);
    }
    let out = out_dir_for(args.out, Some(&args.config));
    let mut sink = match ArtifactSink::new(&out, config.mode_name(), &canonical) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let result = with_jobs(args.jobs, || modes::run(&config, &mut sink));
    match result {
        Ok(true) => match sink.commit() {
            Ok(()) => {
                println!("wrote artifacts to {}", out.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Ok(false) => {
            // numerical validation failed; still publish the report
            let _ = sink.commit();
            eprintln!("numerical validation failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_validate(out: Option<PathBuf>, jobs: Option<usize>) -> ExitCode {
    let out = out_dir_for(out, None);
    let canonical = b"{\"mode\":\"validate\"}".to_vec();
    let mut sink = match ArtifactSink::new(&out, "validate", &canonical) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    match with_jobs(jobs, || modes::validate(&mut sink)) {
        Ok(true) => match sink.commit() {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Ok(false) => {
            let _ = sink.commit();
            eprintln!("numerical validation failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run_mode(None, args),
        Command::QdGen(args) => run_mode(Some("qd_gen"), args),
        Command::QdStats(args) => run_mode(Some("qd_stats"), args),
        Command::MimoCap(args) => run_mode(Some("mimo_cap"), args),
        Command::HbsRun(args) => run_mode(Some("hbs_run"), args),
        Command::HbsDoppler(args) => run_mode(Some("hbs_doppler"), args),
        Command::Validate { out, jobs } => run_validate(out, jobs),
    }
}

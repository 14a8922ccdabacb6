use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collage_core::pipeline::{run_job, run_saliency_job, JobConfig, JobError, Stage};
use collage_core::{CollageError, FitnessWeights};
use log::info;

#[derive(Parser)]
#[command(
    name = "collage",
    version,
    about = "Saliency-driven picture collages from stereo pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a collage from every image in the input directory.
    Run(RunArgs),
    /// Write only the depth and saliency maps.
    Saliency(IoArgs),
}

#[derive(Args)]
struct IoArgs {
    #[arg(long, value_name = "DIR")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// TOML job configuration; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Random seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Canvas area as a fraction of the summed image area.
    #[arg(long)]
    area_ratio: Option<f64>,
    #[arg(long, requires_all = ["lambda_b", "lambda_v"])]
    lambda_a: Option<f64>,
    #[arg(long, requires_all = ["lambda_a", "lambda_v"])]
    lambda_b: Option<f64>,
    #[arg(long, requires_all = ["lambda_a", "lambda_b"])]
    lambda_v: Option<f64>,
    #[arg(long)]
    theta_max_degrees: Option<f64>,
}

fn base_config(io: &IoArgs) -> Result<JobConfig, JobError> {
    let mut cfg = match &io.config {
        Some(path) => JobConfig::load(path).map_err(|source| JobError {
            stage: Stage::Config,
            source,
        })?,
        None => JobConfig::default(),
    };
    if let Some(input) = &io.input {
        cfg.input_dir = input.clone();
    }
    if let Some(output) = &io.output {
        cfg.output_dir = output.clone();
    }
    Ok(cfg)
}

fn run_config(args: &RunArgs) -> Result<JobConfig, JobError> {
    let mut cfg = base_config(&args.io)?;
    if let Some(seed) = args.seed {
        cfg.ga.seed = seed;
    }
    if let Some(g) = args.generations {
        cfg.ga.generations = g;
    }
    if let Some(p) = args.population {
        cfg.ga.population = p;
    }
    if let Some(r) = args.area_ratio {
        cfg.area_ratio = r;
    }
    if let (Some(a), Some(b), Some(v)) = (args.lambda_a, args.lambda_b, args.lambda_v) {
        cfg.ga.weights = FitnessWeights::new(a, b, v).map_err(|source| JobError {
            stage: Stage::Config,
            source,
        })?;
    }
    if let Some(t) = args.theta_max_degrees {
        cfg.theta_max_degrees = t;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), JobError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = run_config(&args)?;
            let report = run_job(&cfg)?;
            let best = report.best();
            info!(
                "wrote {} files to {}",
                report.written.len(),
                cfg.output_dir.display()
            );
            println!(
                "canvas {side}x{side}, best total {:.6} (a_occ {:.6}, b {:.6}, v {:.6})",
                best.total,
                best.a_occ,
                best.b,
                best.v,
                side = report.canvas.side()
            );
        }
        Command::Saliency(io) => {
            let cfg = base_config(&io)?;
            let written = run_saliency_job(&cfg)?;
            println!(
                "wrote {} maps to {}",
                written.len(),
                cfg.output_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("collage: {e}");
            let mut source = std::error::Error::source(&e.source);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if matches!(e.source, CollageError::InvalidInput(_)) && e.stage == Stage::Config {
                return ExitCode::from(2);
            }
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use diffattack_cli::bench::run_bench;
use diffattack_cli::config::ExperimentConfig;
use diffattack_cli::experiment::{run_eval, run_experiment, run_invert};
use diffattack_cli::init_threads;
use diffattack_core::attack::Estimator;

/// Latent-space adversarial attacks through an exactly invertible diffusion
/// chain. Set DIFFATTACK_THREADS to cap the worker threads.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Parent directory for the run directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
            cfg.validate()?;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.out.clone());
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Invert one held-out image and check its reconstruction.
    Invert {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        image: usize,
    },
    /// Attack the held-out images and write a run directory.
    Attack {
        #[command(flatten)]
        common: Common,
        /// Override the configured gradient estimator.
        #[arg(long, value_parser = parse_estimator)]
        estimator: Option<Estimator>,
    },
    /// Compare estimators (none, skip-gradient, rgf) on the same images.
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Time one adversarial example at several step counts.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated step counts; defaults to `bench.steps`.
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<usize>>,
    },
}

fn parse_estimator(s: &str) -> Result<Estimator, String> {
    toml::Value::String(s.into())
        .try_into()
        .map_err(|_| format!("unknown estimator `{s}` (rgf, skip-gradient, none)"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    match cli.command {
        Command::Invert { common, image } => {
            let (cfg, out) = common.load()?;
            let (dir, err) = run_invert(&cfg, &out, image)?;
            println!("max reconstruction error {err:.3e}");
            println!("{}", dir.display());
        }
        Command::Attack { common, estimator } => {
            let (mut cfg, out) = common.load()?;
            if let Some(e) = estimator {
                cfg.attack.estimator = e;
            }
            let run = run_experiment(&cfg, &out)?;
            let a = run.aggregate;
            println!(
                "ASR {:.3} (clean error {:.3}), {} successes, mean SSIM {:.3}, mean PSNR {:.2} dB",
                a.asr, a.clean_error, a.successes, a.mean_ssim, a.mean_psnr
            );
            println!("{}", run.dir.display());
        }
        Command::Eval { common } => {
            let (cfg, out) = common.load()?;
            let (dir, rows) = run_eval(&cfg, &out)?;
            println!("{:<14} {:>6} {:>6} {:>6} {:>8} {:>7} {:>8}", "estimator", "kappa", "eta", "ASR", "clean", "SSIM", "PSNR");
            for r in rows {
                let a = r.aggregate;
                println!(
                    "{:<14} {:>6} {:>6} {:>6.3} {:>8.3} {:>7.3} {:>8.2}",
                    toml::Value::try_from(r.estimator)?.as_str().unwrap_or_default().to_string(),
                    r.budget,
                    r.step_size,
                    a.asr,
                    a.clean_error,
                    a.mean_ssim,
                    a.mean_psnr
                );
            }
            println!("{}", dir.display());
        }
        Command::Bench { common, steps } => {
            let (cfg, out) = common.load()?;
            let steps = steps.unwrap_or_else(|| cfg.bench.steps.clone());
            let (dir, report) = run_bench(&cfg, &out, &steps).context("bench failed")?;
            println!("{:>6} {:>14} {:>16} {:>12}", "T", "cond. calls", "uncond. calls", "s/example");
            for r in &report.rows {
                println!(
                    "{:>6} {:>14} {:>16} {:>12.4}",
                    r.steps, r.conditional_calls, r.unconditional_calls, r.seconds_per_example
                );
            }
            println!("call ratio {:.3}, wall-time ratio {:.3}", report.call_ratio(), report.time_ratio());
            println!("{}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

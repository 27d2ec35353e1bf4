//! Cost of one adversarial example as a function of the step count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::bail;
use diffattack_core::attack::{attack_stack, AttackConfig};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::{image_seed, invert_image, prepare, with_run_dir};
use crate::report::{real, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub steps: usize,
    /// Conditional mixture evaluations per adversarial example.
    pub conditional_calls: u64,
    pub unconditional_calls: u64,
    pub seconds_per_example: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Last row against the first.
    pub fn call_ratio(&self) -> f64 {
        let (a, b) = (self.rows.first().unwrap(), self.rows.last().unwrap());
        b.conditional_calls as f64 / a.conditional_calls as f64
    }

    pub fn time_ratio(&self) -> f64 {
        let (a, b) = (self.rows.first().unwrap(), self.rows.last().unwrap());
        b.seconds_per_example / a.seconds_per_example
    }
}

/// Attacks `cfg.bench.images` images at every step count with early exit
/// off, so each example does the full `N_a` iterations. Inversion and the
/// attack are timed; dataset and classifier preparation are not.
pub fn bench(cfg: &ExperimentConfig, steps: &[usize]) -> anyhow::Result<BenchReport> {
    if steps.len() < 2 {
        bail!("bench needs at least 2 step counts, got {}", steps.len());
    }
    let mut rows = Vec::with_capacity(steps.len());
    for &t in steps {
        let mut cfg = cfg.clone();
        cfg.schedule.steps = t;
        cfg.images = cfg.bench.images;
        let sc = prepare(&cfg)?;
        let mut calls = None;
        let mut seconds = 0.0;
        for i in 0..cfg.images {
            sc.model.reset_call_counts();
            let attack = AttackConfig { early_exit: false, rng_seed: image_seed(&cfg, i), ..cfg.attack };
            let start = Instant::now();
            let stack = invert_image(&cfg, &sc, i)?;
            attack_stack(
                &sc.test.samples()[i],
                &stack,
                sc.test.labels()[i],
                &sc.model,
                &sc.classifier,
                &sc.schedule,
                &attack,
            )?;
            seconds += start.elapsed().as_secs_f64();
            let c = sc.model.call_counts();
            match calls {
                None => calls = Some(c),
                Some(prev) if prev != c => bail!("call counts differ between images at T = {t}"),
                _ => {}
            }
        }
        let c = calls.expect("at least one image");
        rows.push(BenchRow {
            steps: t,
            conditional_calls: c.conditional,
            unconditional_calls: c.unconditional,
            seconds_per_example: seconds / cfg.images as f64,
        });
    }
    Ok(BenchReport { rows })
}

/// [`bench`] inside a `bench-*` run directory holding the config snapshot
/// and `bench.csv`.
pub fn run_bench(cfg: &ExperimentConfig, out: &Path, steps: &[usize]) -> anyhow::Result<(PathBuf, BenchReport)> {
    with_run_dir(out, "bench", |dir| {
        fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
        let report = bench(cfg, steps)?;
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.steps.to_string(),
                    r.conditional_calls.to_string(),
                    r.unconditional_calls.to_string(),
                    real(r.seconds_per_example),
                ]
            })
            .collect();
        write_csv(
            &dir.join("bench.csv"),
            &["steps", "conditional_calls", "unconditional_calls", "seconds_per_example"],
            &rows,
        )?;
        Ok(report)
    })
}

use std::fs;
use std::path::Path;

use diffattack_cli::bench::{bench, run_bench};
use diffattack_cli::config::ExperimentConfig;
use diffattack_cli::experiment::{run_experiment, run_invert};
use diffattack_core::attack::Estimator;

const SMALL: &str = r#"
seed = 11
images = 12

[schedule]
T = 6
beta_start = 0.001
beta_end = 0.2

[dataset.synth]
height = 6
width = 6
samples_per_class = 20

[[dataset.synth.classes]]
name = "h"
templates = ["horizontal-stripes", "top-half"]
std = 0.15
prior = 0.5

[[dataset.synth.classes]]
name = "v"
templates = ["vertical-stripes", "left-half"]
std = 0.15
prior = 0.5

[classifier]
kind = "softmax-linear"
epochs = 200
lr = 0.5

[condition]
mode = "label"
guidance_scale = 0.3

[attack]
iterations = 4
step_size = 0.15
budget = 0.6
rgf_queries = 8

[bench]
images = 1
steps = [4, 8]
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::from_toml(SMALL).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn run_directory_is_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_experiment(&small(), tmp.path()).unwrap();
    for name in ["config.toml", "classifier.bin", "summary.csv", "manifest.toml", "trace_0.csv", "clean_0.pgm", "recon_0.pgm", "adv_11.pgm"] {
        assert!(run.dir.join(name).is_file(), "{name} missing");
    }
    assert!(!run.dir.join("FAILED").exists());
    let summary = String::from_utf8(read(&run.dir, "summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "image,label,clean_pred,final_pred,success,iterations,psnr_db,ssim,l2,linf_delta,asr");
    assert_eq!(lines.len(), 1 + 12 + 1);
    assert!(lines[13].starts_with("mean,"));
}

#[test]
fn same_seed_gives_identical_summary_and_snapshot_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_experiment(&small(), tmp.path()).unwrap();
    let b = run_experiment(&small(), tmp.path()).unwrap();
    assert_ne!(a.dir, b.dir);
    assert_eq!(read(&a.dir, "summary.csv"), read(&b.dir, "summary.csv"));

    let snapshot = ExperimentConfig::load(&a.dir.join("config.toml")).unwrap();
    let c = run_experiment(&snapshot, tmp.path()).unwrap();
    assert_eq!(read(&a.dir, "summary.csv"), read(&c.dir, "summary.csv"));
}

#[test]
fn seed_changes_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_experiment(&small(), tmp.path()).unwrap();
    let mut cfg = small();
    cfg.seed = 12;
    let b = run_experiment(&cfg, tmp.path()).unwrap();
    assert_ne!(read(&a.dir, "summary.csv"), read(&b.dir, "summary.csv"));
}

#[test]
fn no_attack_asr_is_the_clean_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.attack.estimator = Estimator::None;
    let run = run_experiment(&cfg, tmp.path()).unwrap();
    assert_eq!(run.aggregate.asr, run.aggregate.clean_error);
    assert!(run.results.iter().all(|r| r.adversarial == r.reconstruction));
}

#[test]
fn invert_reproduces_the_image() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, err) = run_invert(&small(), tmp.path(), 3).unwrap();
    assert!(err < 1e-10);
    assert!(dir.join("stack_3.bin").is_file());
}

#[test]
fn failed_run_leaves_a_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.classifier.path = Some(tmp.path().join("missing.bin"));
    let e = run_experiment(&cfg, tmp.path()).unwrap_err();
    assert!(format!("{e:#}").contains("FAILED"));
    let dirs: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|d| d.unwrap().path()).filter(|p| p.is_dir()).collect();
    assert_eq!(dirs.len(), 1);
    assert!(dirs[0].join("FAILED").is_file());
}

#[test]
fn schema_errors_name_their_fields() {
    let unknown = SMALL.replace("iterations = 4", "iterations = 4\nstepsize = 0.1");
    let e = ExperimentConfig::from_toml(&unknown).unwrap_err();
    assert!(format!("{e:#}").contains("stepsize"), "{e:#}");

    let bad = SMALL.replace("budget = 0.6", "budget = -1.0").replace("images = 12", "images = 0");
    let e = format!("{:#}", ExperimentConfig::from_toml(&bad).unwrap_err());
    assert!(e.contains("attack") && e.contains("images"), "{e}");

    let two = SMALL.replace("width = 6\n", "width = 6\nchannels = 2\n");
    let e = format!("{:#}", ExperimentConfig::from_toml(&two).unwrap_err());
    assert!(e.contains("dataset.synth.channels"), "{e}");
}

#[test]
fn bench_counts_scale_with_steps() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, report) = run_bench(&small(), tmp.path(), &[4, 8]).unwrap();
    assert_eq!(report.call_ratio(), 2.0);
    // Per T steps: the inversion, 4 iterations of one evaluation plus 8 queries, and the last evaluation.
    assert_eq!(report.rows[0].conditional_calls, 4 * (4 * 9 + 2));
    let csv = String::from_utf8(read(&dir, "bench.csv")).unwrap();
    assert!(csv.starts_with("steps,conditional_calls,unconditional_calls,seconds_per_example\n4,152,152,"));
    assert!(bench(&small(), &[20]).is_err());
}

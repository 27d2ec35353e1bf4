//! End-to-end runs: scenario preparation, per-image attacks and the run
//! directory layout.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use diffattack_core::attack::{attack_stack, AttackConfig, AttackResult, Estimator};
use diffattack_core::chain::{denoise_chain, invert, NoiseMapStack};
use diffattack_core::classifier::{accuracy, train_with, Classifier, LabeledDataset};
use diffattack_core::container::{load_classifier, save_classifier, save_stack};
use diffattack_core::data::{load_idx, synth_dataset, write_image};
use diffattack_core::denoiser::{ClassPrior, DenoiserModel, GaussianMixture};
use diffattack_core::metrics::attack_success_rate;
use diffattack_core::rng::derive_seed;
use diffattack_core::schedule::NoiseSchedule;
use diffattack_core::Sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::report::{real, write_csv};

const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;
const CLASSIFIER_STREAM: u64 = 3;
const IMAGE_STREAM: u64 = 4;

/// Smallest std allowed when fitting a prior to external data.
const MIN_FITTED_STD: f64 = 1e-3;

/// Everything an attack needs, built deterministically from a config.
pub struct Scenario {
    pub schedule: NoiseSchedule,
    pub model: DenoiserModel,
    pub classifier: Classifier,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Classifier accuracy on the attacked images.
    pub clean_accuracy: f64,
}

/// One isotropic Gaussian per class: empirical mean, pooled std.
fn fit_prior(data: &LabeledDataset) -> anyhow::Result<DenoiserModel> {
    let shape = data.shape().context("empty dataset")?;
    let d = shape.len();
    let mut classes = Vec::new();
    for c in 0..data.classes() {
        let members: Vec<&Sample> = data.iter().filter(|(_, y)| *y == c).map(|(x, _)| x).collect();
        if members.is_empty() {
            bail!("class {c} has no samples, cannot fit a prior");
        }
        let n = members.len() as f64;
        let mut mean = vec![0.0; d];
        for x in &members {
            mean.iter_mut().zip(x.as_slice()).for_each(|(m, v)| *m += v / n);
        }
        let ss: f64 = members
            .iter()
            .flat_map(|x| x.as_slice().iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)))
            .sum();
        let std = (ss / (n * d as f64)).sqrt().max(MIN_FITTED_STD);
        classes.push(ClassPrior {
            name: format!("class-{c}"),
            prior: n / data.len() as f64,
            mixture: GaussianMixture::new(
                vec![diffattack_core::denoiser::Component { weight: 1.0, mean: Sample::new(shape, mean)?, std }],
                Some(c),
            )?,
        });
    }
    // Renormalize priors against rounding.
    let total: f64 = classes.iter().map(|c| c.prior).sum();
    classes.iter_mut().for_each(|c| c.prior /= total);
    Ok(DenoiserModel::new(classes)?)
}

pub fn prepare(cfg: &ExperimentConfig) -> anyhow::Result<Scenario> {
    let schedule = cfg.schedule.clone().build()?;
    let (train, test, model) = match (&cfg.dataset.synth, &cfg.dataset.idx) {
        (Some(spec), _) => {
            let (train, model) = synth_dataset(spec, derive_seed(cfg.seed, &[TRAIN_STREAM]))?;
            let (test, _) = synth_dataset(spec, derive_seed(cfg.seed, &[TEST_STREAM]))?;
            (train, test, model)
        }
        (None, Some(idx)) => {
            let train = load_idx(&idx.images, &idx.labels)?;
            let test = match (&idx.test_images, &idx.test_labels) {
                (Some(i), Some(l)) => load_idx(i, l)?,
                _ => train.clone(),
            };
            let model = fit_prior(&train)?;
            (train, test, model)
        }
        (None, None) => bail!("dataset: no source configured"),
    };
    if test.len() < cfg.images {
        bail!("images: {} requested but only {} held-out samples", cfg.images, test.len());
    }
    if let Some(id) = cfg.condition.class {
        if id >= model.class_count() {
            bail!("condition.class: class {id} does not exist ({} classes)", model.class_count());
        }
    }
    let classifier = match &cfg.classifier.path {
        Some(path) => {
            let clf = load_classifier(path)?;
            if Some(clf.input_shape()) != train.shape() || clf.classes() != train.classes() {
                bail!(
                    "classifier.path: model expects {} inputs and {} classes, data has {:?} and {}",
                    clf.input_shape(),
                    clf.classes(),
                    train.shape(),
                    train.classes()
                );
            }
            clf
        }
        None => {
            let mut clf = train_with(&train, &cfg.classifier.train_config(), derive_seed(cfg.seed, &[CLASSIFIER_STREAM]))?;
            clf.set_train_accuracy(Some(accuracy(&clf, &train)?));
            clf
        }
    };
    let attacked = LabeledDataset::new(
        test.samples()[..cfg.images].to_vec(),
        test.labels()[..cfg.images].to_vec(),
        test.classes(),
    )?;
    let clean_accuracy = accuracy(&classifier, &attacked)?;
    Ok(Scenario { schedule, model, classifier, train, test: attacked, clean_accuracy })
}

pub fn image_seed(cfg: &ExperimentConfig, index: usize) -> u64 {
    derive_seed(cfg.seed, &[IMAGE_STREAM, index as u64])
}

/// Inverts image `index` of the scenario.
pub fn invert_image(cfg: &ExperimentConfig, sc: &Scenario, index: usize) -> anyhow::Result<NoiseMapStack> {
    let x = &sc.test.samples()[index];
    let y = sc.test.labels()[index];
    let cond = cfg.condition.for_label(y);
    Ok(invert(x, &cond, &sc.model, &sc.schedule, derive_seed(image_seed(cfg, index), &[0]))?)
}

/// Attacks every scenario image with `attack` (its seed replaced per image).
/// Images run in parallel; results are in image order and do not depend on
/// the thread count.
pub fn attack_images(cfg: &ExperimentConfig, sc: &Scenario, attack: &AttackConfig) -> anyhow::Result<Vec<AttackResult>> {
    (0..sc.test.len())
        .into_par_iter()
        .map(|i| {
            let stack = invert_image(cfg, sc, i)?;
            let attack = AttackConfig { rng_seed: image_seed(cfg, i), ..*attack };
            let x = &sc.test.samples()[i];
            let res = attack_stack(x, &stack, sc.test.labels()[i], &sc.model, &sc.classifier, &sc.schedule, &attack)
                .with_context(|| format!("attacking image {i}"))?;
            Ok(res)
        })
        .collect()
}

/// Aggregate figures for one estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub asr: f64,
    pub clean_error: f64,
    /// Means over successful images; NaN when nothing succeeded.
    pub mean_ssim: f64,
    pub mean_psnr: f64,
    pub successes: usize,
}

pub fn aggregate(results: &[AttackResult]) -> anyhow::Result<Aggregate> {
    let clean: Vec<usize> = results.iter().map(|r| r.clean_pred).collect();
    let labels: Vec<usize> = results.iter().map(|r| r.label).collect();
    let (asr, clean_error) = attack_success_rate(results, &clean, &labels)?;
    let wins: Vec<&AttackResult> = results.iter().filter(|r| r.success).collect();
    let mean = |f: fn(&AttackResult) -> f64| {
        if wins.is_empty() {
            f64::NAN
        } else {
            wins.iter().map(|r| f(r)).sum::<f64>() / wins.len() as f64
        }
    };
    Ok(Aggregate {
        asr,
        clean_error,
        mean_ssim: mean(|r| r.metrics.ssim),
        mean_psnr: mean(|r| r.metrics.psnr_db),
        successes: wins.len(),
    })
}

fn image_ext(x: &Sample) -> &'static str {
    if x.shape().channels == 3 {
        "ppm"
    } else {
        "pgm"
    }
}

const SUMMARY_HEADER: [&str; 11] = [
    "image", "label", "clean_pred", "final_pred", "success", "iterations", "psnr_db", "ssim", "l2", "linf_delta", "asr",
];

fn summary_rows(results: &[AttackResult], agg: &Aggregate) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.label.to_string(),
                r.clean_pred.to_string(),
                r.final_pred.to_string(),
                u8::from(r.success).to_string(),
                r.iterations_used.to_string(),
                real(r.metrics.psnr_db),
                real(r.metrics.ssim),
                real(r.metrics.l2),
                real(r.delta.norm_linf()),
                real(if r.success { 1.0 } else { 0.0 }),
            ]
        })
        .collect();
    let n = results.len() as f64;
    let mean = |f: &dyn Fn(&AttackResult) -> f64| real(results.iter().map(f).sum::<f64>() / n);
    rows.push(vec![
        "mean".into(),
        String::new(),
        String::new(),
        String::new(),
        agg.successes.to_string(),
        String::new(),
        mean(&|r| r.metrics.psnr_db),
        mean(&|r| r.metrics.ssim),
        mean(&|r| r.metrics.l2),
        mean(&|r| r.delta.norm_linf()),
        real(agg.asr),
    ]);
    rows
}

fn write_trace(path: &Path, res: &AttackResult) -> anyhow::Result<()> {
    let rows = res
        .trace
        .iter()
        .map(|t| vec![t.iter.to_string(), real(t.loss), t.pred.to_string(), real(t.linf_delta), real(t.l2_image)])
        .collect::<Vec<_>>();
    write_csv(path, &["iter", "loss", "pred", "linf_delta", "l2_image"], &rows)
}

/// Creates `<out>/<prefix>-<UTC timestamp>`, adding a counter on collision.
pub fn create_run_dir(out: &Path, prefix: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = out.join(format!("{prefix}-{stamp}"));
    let mut dir = base.clone();
    let mut k = 1;
    loop {
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                dir = PathBuf::from(format!("{}-{k}", base.display()));
                k += 1;
            }
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
}

/// Runs `body` inside a fresh run directory, leaving a `FAILED` marker with
/// the error chain if it fails.
pub fn with_run_dir<T>(
    out: &Path,
    prefix: &str,
    body: impl FnOnce(&Path) -> anyhow::Result<T>,
) -> anyhow::Result<(PathBuf, T)> {
    let dir = create_run_dir(out, prefix)?;
    match body(&dir) {
        Ok(v) => Ok((dir, v)),
        Err(e) => {
            let _ = fs::write(dir.join("FAILED"), format!("{e:#}\n"));
            Err(e.context(format!("run failed, see {}", dir.join("FAILED").display())))
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    schedule_hash: String,
    estimator: Estimator,
    images: usize,
    /// Hex, since derived seeds use the full `u64` range.
    image_seeds: Vec<String>,
    train_accuracy: Option<f64>,
    clean_accuracy: f64,
    summary: &'a Aggregate,
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, sc: &Scenario, agg: &Aggregate) -> anyhow::Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        schedule_hash: format!("{:016x}", sc.schedule.hash()),
        estimator: cfg.attack.estimator,
        images: cfg.images,
        image_seeds: (0..cfg.images).map(|i| format!("{:016x}", image_seed(cfg, i))).collect(),
        train_accuracy: sc.classifier.train_accuracy(),
        clean_accuracy: sc.clean_accuracy,
        summary: agg,
    };
    fs::write(dir.join("manifest.toml"), toml::to_string(&manifest)?)?;
    Ok(())
}

/// Output of [`run_experiment`].
#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub results: Vec<AttackResult>,
    pub aggregate: Aggregate,
}

/// Full attack run into a new directory under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<RunOutput> {
    let (dir, (results, aggregate)) = with_run_dir(out, "run", |dir| {
        fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
        let sc = prepare(cfg)?;
        save_classifier(&sc.classifier, &dir.join("classifier.bin"))?;
        let results = attack_images(cfg, &sc, &cfg.attack)?;
        let agg = aggregate(&results)?;
        for (i, r) in results.iter().enumerate() {
            let ext = image_ext(&r.adversarial);
            write_image(&sc.test.samples()[i], &dir.join(format!("clean_{i}.{ext}")))?;
            write_image(&r.reconstruction, &dir.join(format!("recon_{i}.{ext}")))?;
            write_image(&r.adversarial, &dir.join(format!("adv_{i}.{ext}")))?;
            write_trace(&dir.join(format!("trace_{i}.csv")), r)?;
        }
        write_csv(&dir.join("summary.csv"), &SUMMARY_HEADER, &summary_rows(&results, &agg))?;
        write_manifest(dir, cfg, &sc, &agg)?;
        Ok((results, agg))
    })?;
    Ok(RunOutput { dir, results, aggregate })
}

/// Reconstruction check for one image: writes the noise map stack and the
/// reconstruction, returns the max-abs reconstruction error.
pub fn run_invert(cfg: &ExperimentConfig, out: &Path, index: usize) -> anyhow::Result<(PathBuf, f64)> {
    with_run_dir(out, "invert", |dir| {
        fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
        let sc = prepare(cfg)?;
        if index >= sc.test.len() {
            bail!("image index {index} out of range ({} images)", sc.test.len());
        }
        let stack = invert_image(cfg, &sc, index)?;
        let recon = denoise_chain(&stack, &sc.model, None, &sc.schedule)?;
        let x = &sc.test.samples()[index];
        let err = recon.max_abs_diff(x)?;
        save_stack(&stack, &dir.join(format!("stack_{index}.bin")))?;
        let ext = image_ext(x);
        write_image(x, &dir.join(format!("clean_{index}.{ext}")))?;
        write_image(&recon.map(|v| v.clamp(0.0, 1.0)), &dir.join(format!("recon_{index}.{ext}")))?;
        Ok(err)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AblationRow {
    pub estimator: Estimator,
    pub budget: f64,
    pub step_size: f64,
    pub aggregate: Aggregate,
}

pub const ESTIMATORS: [Estimator; 3] = [Estimator::None, Estimator::SkipGradient, Estimator::Rgf];

/// Runs every estimator at the configured budget and at the default budget and step size
/// (`kappa = 0.1`, `eta = 0.04`). Returns rows and all per-image results.
pub fn ablation(cfg: &ExperimentConfig, sc: &Scenario) -> anyhow::Result<Vec<(AblationRow, Vec<AttackResult>)>> {
    let defaults = AttackConfig::default();
    let mut budgets = vec![(cfg.attack.budget, cfg.attack.step_size)];
    if (cfg.attack.budget, cfg.attack.step_size) != (defaults.budget, defaults.step_size) {
        budgets.push((defaults.budget, defaults.step_size));
    }
    let mut rows = Vec::new();
    for (budget, step_size) in budgets {
        for estimator in ESTIMATORS {
            let attack = AttackConfig { estimator, budget, step_size, ..cfg.attack };
            let results = attack_images(cfg, sc, &attack)?;
            let row = AblationRow { estimator, budget, step_size, aggregate: aggregate(&results)? };
            rows.push((row, results));
        }
    }
    Ok(rows)
}

pub fn run_eval(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(PathBuf, Vec<AblationRow>)> {
    with_run_dir(out, "eval", |dir| {
        fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
        let sc = prepare(cfg)?;
        let rows: Vec<AblationRow> = ablation(cfg, &sc)?.into_iter().map(|(r, _)| r).collect();
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let est = toml::Value::try_from(r.estimator)?.as_str().unwrap_or_default().to_string();
                Ok(vec![
                    est,
                    real(r.budget),
                    real(r.step_size),
                    real(r.aggregate.asr),
                    real(r.aggregate.clean_error),
                    r.aggregate.successes.to_string(),
                    real(r.aggregate.mean_ssim),
                    real(r.aggregate.mean_psnr),
                ])
            })
            .collect::<anyhow::Result<_>>()?;
        write_csv(
            &dir.join("ablation.csv"),
            &["estimator", "budget", "step_size", "asr", "clean_error", "successes", "mean_ssim", "mean_psnr"],
            &table,
        )?;
        Ok(rows)
    })
}

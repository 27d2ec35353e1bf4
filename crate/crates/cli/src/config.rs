//! Experiment configuration: a strict TOML schema. Unknown keys are
//! rejected at parse time; semantic checks report every violation with its
//! field path.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use diffattack_core::attack::AttackConfig;
use diffattack_core::classifier::{Activation, ClassifierKind, TrainConfig};
use diffattack_core::data::SynthSpec;
use diffattack_core::denoiser::Condition;
use diffattack_core::schedule::ScheduleConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Number of held-out images to attack.
    #[serde(default = "default_images")]
    pub images: usize,
    pub schedule: ScheduleConfig,
    pub dataset: DatasetConfig,
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub condition: ConditionConfig,
    /// `rng_seed` here is ignored: every image derives its own from `seed`.
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub bench: BenchConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

fn default_images() -> usize {
    100
}

/// Exactly one of the two sources.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub synth: Option<SynthSpec>,
    pub idx: Option<IdxConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxConfig {
    pub images: PathBuf,
    pub labels: PathBuf,
    /// Held-out files to attack; the training files are used when absent.
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierArch {
    #[default]
    SoftmaxLinear,
    Mlp1Hidden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    #[serde(default)]
    pub kind: ClassifierArch,
    pub hidden: Option<usize>,
    pub activation: Option<Activation>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    /// Load a saved classifier container instead of training.
    pub path: Option<PathBuf>,
}

fn default_epochs() -> usize {
    300
}
fn default_lr() -> f64 {
    0.5
}
fn default_init_scale() -> f64 {
    0.1
}

impl ClassifierConfig {
    pub fn kind(&self) -> ClassifierKind {
        match self.kind {
            ClassifierArch::SoftmaxLinear => ClassifierKind::SoftmaxLinear,
            ClassifierArch::Mlp1Hidden => ClassifierKind::Mlp1Hidden {
                hidden: self.hidden.unwrap_or(16),
                activation: self.activation.unwrap_or_default(),
            },
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { kind: self.kind(), epochs: self.epochs, lr: self.lr, init_scale: self.init_scale }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionMode {
    /// Condition every image on its own label.
    #[default]
    Label,
    /// A fixed class for every image.
    Fixed,
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    #[serde(default)]
    pub mode: ConditionMode,
    pub class: Option<usize>,
    /// Defaults to 1 for class conditions and 0 for the null condition.
    pub guidance_scale: Option<f64>,
}

impl ConditionConfig {
    pub fn for_label(&self, label: usize) -> Condition {
        match self.mode {
            ConditionMode::Label => Condition::class(label, self.guidance_scale.unwrap_or(1.0)),
            ConditionMode::Fixed => Condition::class(self.class.unwrap_or(0), self.guidance_scale.unwrap_or(1.0)),
            ConditionMode::Null => Condition::null(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// Images attacked per step count.
    pub images: usize,
    pub steps: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { images: 2, steps: vec![20, 200] }
    }
}

/// Every violation found, each with its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaErrors(pub Vec<(String, String)>);

impl fmt::Display for SchemaErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for (path, msg) in &self.0 {
            writeln!(f, "  {path}: {msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SchemaErrors {}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Number of classes, when known without reading data files.
    pub fn known_classes(&self) -> Option<usize> {
        self.dataset.synth.as_ref().map(|s| s.classes.len())
    }

    pub fn validate(&self) -> Result<(), SchemaErrors> {
        let mut errs = Vec::new();
        let mut err = |path: &str, msg: String| errs.push((path.to_string(), msg));

        // TOML integers are signed 64-bit; larger seeds could not be snapshotted.
        if i64::try_from(self.seed).is_err() {
            err("seed", format!("must be at most {}", i64::MAX));
        }
        if self.images == 0 {
            err("images", "must be at least 1".into());
        }
        if let Err(e) = self.schedule.clone().build() {
            err("schedule", e.to_string());
        }

        match (&self.dataset.synth, &self.dataset.idx) {
            (Some(_), Some(_)) => err("dataset", "set exactly one of `synth` and `idx`".into()),
            (None, None) => err("dataset", "one of `synth` or `idx` is required".into()),
            (Some(spec), None) => {
                if let Err(e) = spec.validate() {
                    err("dataset.synth", e.to_string());
                }
                // Runs write PGM or PPM.
                if !matches!(spec.channels, 1 | 3) {
                    err("dataset.synth.channels", format!("must be 1 or 3, got {}", spec.channels));
                }
                let available = spec.samples_per_class * spec.classes.len();
                if self.images > available {
                    err("images", format!("{} exceeds the {available} held-out samples", self.images));
                }
            }
            (None, Some(idx)) => {
                if idx.test_images.is_some() != idx.test_labels.is_some() {
                    err("dataset.idx", "`test_images` and `test_labels` go together".into());
                }
            }
        }

        let c = &self.classifier;
        if c.path.is_none() {
            if c.epochs == 0 {
                err("classifier.epochs", "must be at least 1".into());
            }
            if !(c.lr > 0.0 && c.lr.is_finite()) {
                err("classifier.lr", format!("must be positive, got {}", c.lr));
            }
            if !(c.init_scale >= 0.0 && c.init_scale.is_finite()) {
                err("classifier.init_scale", format!("must be non-negative, got {}", c.init_scale));
            }
        }
        match c.kind {
            ClassifierArch::SoftmaxLinear => {
                if c.hidden.is_some() {
                    err("classifier.hidden", "only applies to `mlp1-hidden`".into());
                }
                if c.activation.is_some() {
                    err("classifier.activation", "only applies to `mlp1-hidden`".into());
                }
            }
            ClassifierArch::Mlp1Hidden => {
                if c.hidden == Some(0) {
                    err("classifier.hidden", "must be at least 1".into());
                }
            }
        }

        let cond = &self.condition;
        if let Some(s) = cond.guidance_scale {
            if !s.is_finite() {
                err("condition.guidance_scale", "must be finite".into());
            }
        }
        match cond.mode {
            ConditionMode::Fixed => match (cond.class, self.known_classes()) {
                (None, _) => err("condition.class", "required when mode is `fixed`".into()),
                (Some(id), Some(k)) if id >= k => {
                    err("condition.class", format!("class {id} does not exist ({k} classes)"))
                }
                _ => {}
            },
            ConditionMode::Null => {
                if cond.guidance_scale.is_some_and(|s| s != 0.0) {
                    err("condition.guidance_scale", "must be 0 (or absent) for the null condition".into());
                }
                if cond.class.is_some() {
                    err("condition.class", "not allowed for the null condition".into());
                }
            }
            ConditionMode::Label => {
                if cond.class.is_some() {
                    err("condition.class", "only applies to mode `fixed`".into());
                }
            }
        }

        if let Err(e) = self.attack.validate() {
            err("attack", e.to_string());
        }
        if self.bench.steps.len() < 2 {
            err("bench.steps", "needs at least 2 step counts".into());
        }
        if self.bench.steps.contains(&0) {
            err("bench.steps", "step counts must be positive".into());
        }
        if self.bench.images == 0 {
            err("bench.images", "must be at least 1".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(SchemaErrors(errs))
        }
    }
}

//! Browser front end for the toy attack pipeline.
//!
//! [`Lab`] builds a small two-class prior in memory (8x8 stripes and
//! half-planes), trains a linear classifier on it and exposes three
//! operations to JavaScript: exact inversion, a sweep of the top latent
//! along one direction, and the latent attack itself. Every method also
//! works natively, which is how the tests drive it.

use diffattack_core::attack::{clamp01, run_attack, skip_gradient, AttackConfig, Estimator};
use diffattack_core::chain::{denoise_chain, invert, NoiseMapStack};
use diffattack_core::classifier::{
    accuracy, forward_loss, train_classifier, Classifier, ClassifierKind, LabeledDataset,
};
use diffattack_core::data::{synth_dataset, ClassSpec, SynthSpec};
use diffattack_core::denoiser::{Condition, DenoiserModel};
use diffattack_core::metrics::{psnr, ssim};
use diffattack_core::rng::{self, derive_seed};
use diffattack_core::schedule::{NoiseSchedule, ScheduleConfig};
use diffattack_core::Sample;
use wasm_bindgen::prelude::*;

pub const SIDE: usize = 8;
const STEPS: usize = 10;
const SAMPLES_PER_CLASS: usize = 100;

fn spec() -> SynthSpec {
    let class = |name: &str, templates: [&str; 2]| ClassSpec {
        name: name.into(),
        templates: templates.iter().map(|s| s.to_string()).collect(),
        std: 0.15,
        prior: 0.5,
    };
    SynthSpec {
        height: SIDE,
        width: SIDE,
        channels: 1,
        samples_per_class: SAMPLES_PER_CLASS,
        low: 0.2,
        high: 0.8,
        classes: vec![
            class("horizontal", ["horizontal-stripes", "top-half"]),
            class("vertical", ["vertical-stripes", "left-half"]),
        ],
    }
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

#[wasm_bindgen(getter_with_clone)]
pub struct Inversion {
    /// Chain output replayed from the extracted latents.
    pub reconstruction: Vec<f64>,
    pub max_error: f64,
    /// Mean square of each noise map `z_1..z_T`; 1 for white noise.
    pub noise_variance: Vec<f64>,
    /// The top latent `x_T`, for display.
    pub top: Vec<f64>,
}

#[wasm_bindgen(getter_with_clone)]
pub struct Sweep {
    pub alphas: Vec<f64>,
    /// `alphas.len()` clamped frames of `SIDE * SIDE` pixels each.
    pub frames: Vec<f64>,
    pub predictions: Vec<u32>,
    pub losses: Vec<f64>,
}

#[wasm_bindgen(getter_with_clone)]
pub struct Attack {
    pub adversarial: Vec<f64>,
    pub reconstruction: Vec<f64>,
    pub delta: Vec<f64>,
    pub success: bool,
    pub clean_pred: u32,
    pub final_pred: u32,
    pub iterations: u32,
    pub losses: Vec<f64>,
    pub ssim: f64,
    pub psnr: f64,
    /// Conditional plus unconditional denoiser calls spent.
    pub denoiser_calls: f64,
}

#[wasm_bindgen]
pub struct Lab {
    schedule: NoiseSchedule,
    model: DenoiserModel,
    classifier: Classifier,
    test: LabeledDataset,
    guidance: f64,
    seed: u64,
}

impl Lab {
    fn sample(&self, index: usize) -> Result<(&Sample, usize), String> {
        let n = self.test.len();
        if index >= n {
            return Err(format!("image {index} out of range ({n} images)"));
        }
        Ok((&self.test.samples()[index], self.test.labels()[index]))
    }

    fn condition(&self, label: usize) -> Condition {
        Condition::class(label, self.guidance)
    }

    fn stack(&self, index: usize, seed: u64) -> Result<NoiseMapStack, String> {
        let (x, y) = self.sample(index)?;
        invert(x, &self.condition(y), &self.model, &self.schedule, seed).map_err(err)
    }

    fn calls(&self) -> u64 {
        let c = self.model.call_counts();
        c.conditional + c.unconditional
    }
}

#[wasm_bindgen]
impl Lab {
    /// Builds the prior, a held-out image set and a trained classifier.
    /// `guidance` is the guidance scale of the class condition.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, guidance: f64) -> Result<Lab, String> {
        if !guidance.is_finite() || guidance < 0.0 {
            return Err(format!("guidance scale {guidance} must be finite and >= 0"));
        }
        let seed = u64::from(seed);
        let spec = spec();
        let schedule = ScheduleConfig::new(STEPS, 1e-3, 0.2).build().map_err(err)?;
        let (train, model) = synth_dataset(&spec, derive_seed(seed, &[1])).map_err(err)?;
        let (test, _) = synth_dataset(&spec, derive_seed(seed, &[2])).map_err(err)?;
        let classifier =
            train_classifier(&train, ClassifierKind::SoftmaxLinear, 300, 0.5, derive_seed(seed, &[3]))
                .map_err(err)?;
        Ok(Lab { schedule, model, classifier, test, guidance, seed })
    }

    pub fn side(&self) -> usize {
        SIDE
    }

    pub fn image_count(&self) -> usize {
        self.test.len()
    }

    pub fn class_name(&self, class: usize) -> String {
        spec().classes.get(class).map(|c| c.name.clone()).unwrap_or_default()
    }

    pub fn label(&self, index: usize) -> Result<u32, String> {
        Ok(self.sample(index)?.1 as u32)
    }

    pub fn image(&self, index: usize) -> Result<Vec<f64>, String> {
        Ok(self.sample(index)?.0.as_slice().to_vec())
    }

    pub fn predict(&self, pixels: Vec<f64>) -> Result<u32, String> {
        let x = Sample::new(self.test.samples()[0].shape(), pixels).map_err(err)?;
        self.classifier.predict(&x).map(|p| p as u32).map_err(err)
    }

    /// Held-out accuracy of the classifier on the clean images.
    pub fn clean_accuracy(&self) -> Result<f64, String> {
        accuracy(&self.classifier, &self.test).map_err(err)
    }

    /// Extracts the latents of image `index` and replays the chain.
    pub fn invert(&self, index: usize, seed: u32) -> Result<Inversion, String> {
        let (x, _) = self.sample(index)?;
        let stack = self.stack(index, u64::from(seed))?;
        let out = denoise_chain(&stack, &self.model, None, &self.schedule).map_err(err)?;
        let noise_variance = stack
            .z
            .iter()
            .map(|z| z.as_slice().iter().map(|v| v * v).sum::<f64>() / z.len() as f64)
            .collect();
        Ok(Inversion {
            max_error: out.max_abs_diff(x).map_err(err)?,
            reconstruction: out.into_vec(),
            noise_variance,
            top: stack.x_top.as_slice().to_vec(),
        })
    }

    /// Moves the top latent along one direction, `alpha` from 0 to
    /// `radius` in `frames` steps, with the noise maps held fixed.
    /// `direction` is "gradient" (sign of the skip gradient of the loss)
    /// or "random" (a random sign pattern).
    pub fn sweep(&self, index: usize, direction: &str, radius: f64, frames: usize) -> Result<Sweep, String> {
        if frames < 2 || !radius.is_finite() {
            return Err("a sweep needs at least 2 frames and a finite radius".into());
        }
        let (x, y) = self.sample(index)?;
        let stack = self.stack(index, derive_seed(self.seed, &[index as u64]))?;
        let zero = Sample::zeros(x.shape());
        let dir = match direction {
            "gradient" => skip_gradient(&stack, &self.model, &self.classifier, y, &zero, &self.schedule)
                .map_err(err)?
                .map(|v| if v == 0.0 { 0.0 } else { v.signum() }),
            "random" => {
                let mut r = rng::substream(self.seed, &[index as u64, 1]);
                rng::standard_normal(&mut r, x.shape()).map(f64::signum)
            }
            other => return Err(format!("unknown direction {other:?}")),
        };
        let mut out = Sweep { alphas: Vec::new(), frames: Vec::new(), predictions: Vec::new(), losses: Vec::new() };
        for k in 0..frames {
            let alpha = radius * k as f64 / (frames - 1) as f64;
            let img = clamp01(&denoise_chain(&stack, &self.model, Some(&dir.scale(alpha)), &self.schedule).map_err(err)?);
            let loss = forward_loss(&self.classifier, &img, y).map_err(err)?;
            out.alphas.push(alpha);
            out.predictions.push(self.classifier.predict(&img).map_err(err)? as u32);
            out.losses.push(loss.loss);
            out.frames.extend_from_slice(img.as_slice());
        }
        Ok(out)
    }

    /// Runs the latent attack on image `index`. `estimator` is "rgf",
    /// "skip-gradient" or "none".
    #[allow(clippy::too_many_arguments)]
    pub fn attack(
        &self,
        index: usize,
        estimator: &str,
        budget: f64,
        step_size: f64,
        iterations: usize,
        queries: usize,
        seed: u32,
    ) -> Result<Attack, String> {
        let (x, y) = self.sample(index)?;
        let estimator = match estimator {
            "rgf" => Estimator::Rgf,
            "skip-gradient" => Estimator::SkipGradient,
            "none" => Estimator::None,
            other => return Err(format!("unknown estimator {other:?}")),
        };
        let cfg = AttackConfig {
            iterations,
            step_size,
            budget,
            rgf_queries: queries,
            estimator,
            rng_seed: u64::from(seed),
            ..AttackConfig::default()
        };
        let before = self.calls();
        let r = run_attack(x, y, &self.model, &self.classifier, &self.schedule, &self.condition(y), &cfg)
            .map_err(err)?;
        Ok(Attack {
            ssim: ssim(x, &r.adversarial).map_err(err)?,
            psnr: psnr(x, &r.adversarial).map_err(err)?,
            denoiser_calls: (self.calls() - before) as f64,
            losses: r.trace.iter().map(|t| t.loss).collect(),
            success: r.success,
            clean_pred: r.clean_pred as u32,
            final_pred: r.final_pred as u32,
            iterations: r.iterations_used as u32,
            adversarial: r.adversarial.into_vec(),
            reconstruction: r.reconstruction.into_vec(),
            delta: r.delta.into_vec(),
        })
    }
}

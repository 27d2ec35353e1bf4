//! Latent perturbation attack: gradient estimation through the denoising
//! chain, momentum sign steps and ℓ∞ projection.

use serde::{Deserialize, Serialize};

use crate::chain::{denoise_chain, invert, NoiseMapStack};
use crate::classifier::{forward_loss, input_gradient, Classifier};
use crate::denoiser::{Condition, DenoiserModel};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::rng;
use crate::sample::Sample;
use crate::schedule::NoiseSchedule;

const INVERT_STREAM: u64 = 0;
const QUERY_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    #[default]
    Rgf,
    SkipGradient,
    /// No gradient at all; the iterate never moves.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackConfig {
    pub iterations: usize,
    pub step_size: f64,
    pub budget: f64,
    pub momentum: f64,
    pub rgf_queries: usize,
    pub rgf_sigma: f64,
    pub estimator: Estimator,
    pub rng_seed: u64,
    /// Stop as soon as the prediction flips.
    pub early_exit: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            step_size: 0.04,
            budget: 0.1,
            momentum: 1.0,
            rgf_queries: 64,
            rgf_sigma: 1e-3,
            estimator: Estimator::Rgf,
            rng_seed: 0,
            early_exit: true,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidAttack(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("step_size", self.step_size)?;
        positive("budget", self.budget)?;
        positive("rgf_sigma", self.rgf_sigma)?;
        if !(self.momentum.is_finite() && self.momentum >= 0.0) {
            return Err(Error::InvalidAttack(format!(
                "momentum must be non-negative, got {}",
                self.momentum
            )));
        }
        if self.rgf_queries == 0 {
            return Err(Error::InvalidAttack("rgf_queries must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub loss: f64,
    pub pred: usize,
    pub linf_delta: f64,
    pub l2_image: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    /// Clamped output of the chain at the final perturbation.
    pub adversarial: Sample,
    /// Clamped output of the unperturbed chain.
    pub reconstruction: Sample,
    pub delta: Sample,
    pub success: bool,
    pub label: usize,
    /// Prediction on the reconstruction.
    pub clean_pred: usize,
    pub final_pred: usize,
    pub iterations_used: usize,
    pub trace: Vec<TraceRow>,
    /// Adversarial output against the clean input.
    pub metrics: MetricReport,
}

#[cfg(test)]
impl AttackResult {
    pub(crate) fn empty_for_test(success: bool) -> Self {
        let x = Sample::zeros(crate::sample::Shape::flat(1));
        Self {
            adversarial: x.clone(),
            reconstruction: x.clone(),
            delta: x,
            success,
            label: 0,
            clean_pred: 0,
            final_pred: usize::from(success),
            iterations_used: 0,
            trace: Vec::new(),
            metrics: MetricReport { psnr_db: f64::INFINITY, ssim: 1.0, l2: 0.0, linf: 0.0 },
        }
    }
}

/// Boundary processing: clamp to `[0, 1]`.
pub fn clamp01(x: &Sample) -> Sample {
    x.map(|v| v.clamp(0.0, 1.0))
}

/// Subgradient of [`clamp01`]: 1 on the open interior, 0 elsewhere.
pub fn clamp_mask(x: &Sample) -> Sample {
    x.map(|v| if v > 0.0 && v < 1.0 { 1.0 } else { 0.0 })
}

/// Sign with `sign(0) = 0`.
fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn momentum_step(g_prev: &Sample, grad: &Sample, mu: f64) -> Result<Sample> {
    let l1 = grad.norm_l1();
    let inv = if l1 > 0.0 { 1.0 / l1 } else { 0.0 };
    g_prev.zip_with(grad, |p, g| mu * p + g * inv)
}

pub fn project_linf(delta: &Sample, kappa: f64) -> Sample {
    delta.map(|v| v.clamp(-kappa, kappa))
}

/// Random gradient-free estimate of `J_map(delta)^T g_base`:
/// `1/(N sigma) * sum_n <g_base, map(delta + sigma u_n) - base> u_n`, with
/// `u_n` uniform on the radius-`sqrt(d)` sphere drawn from substream `n` of
/// `seed`. `base` must equal `map(delta)`.
///
/// Queries run in parallel under the `parallel` feature; the sum is taken in
/// query order, so the result does not depend on scheduling.
pub fn rgf_estimate<F>(
    map: F,
    base: &Sample,
    delta: &Sample,
    g_base: &Sample,
    queries: usize,
    sigma: f64,
    seed: u64,
) -> Result<Sample>
where
    F: Fn(&Sample) -> Result<Sample> + Sync,
{
    if queries == 0 || !(sigma > 0.0) {
        return Err(Error::InvalidAttack(format!(
            "RGF needs queries >= 1 and sigma > 0, got {queries} and {sigma}"
        )));
    }
    base.ensure_shape(g_base.shape())?;
    let shape = delta.shape();
    let weight = 1.0 / (queries as f64 * sigma);
    let query = |n: usize| -> Result<Sample> {
        let u = rng::isotropic_direction(&mut rng::substream(seed, &[n as u64]), shape);
        let probe = delta.zip_with(&u, |d, ui| d + sigma * ui)?;
        let out = map(&probe)?;
        if !out.is_finite() {
            return Err(Error::NonFinite(format!(
                "chain output for RGF query {n} (schedule or model mismatch?)"
            )));
        }
        let diff = out.sub(base)?;
        Ok(u.scale(weight * g_base.dot(&diff)?))
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<Sample> = {
        use rayon::prelude::*;
        (0..queries).into_par_iter().map(query).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Sample> = (0..queries).map(query).collect::<Result<_>>()?;

    let mut acc = Sample::zeros(shape);
    for p in &parts {
        acc = acc.add(p)?;
    }
    Ok(acc)
}

/// Everything needed to differentiate the loss through one chain.
struct Target<'a> {
    stack: &'a NoiseMapStack,
    model: &'a DenoiserModel,
    classifier: &'a Classifier,
    schedule: &'a NoiseSchedule,
    label: usize,
}

impl Target<'_> {
    fn chain(&self, delta: &Sample) -> Result<Sample> {
        let out = denoise_chain(self.stack, self.model, Some(delta), self.schedule)?;
        if !out.is_finite() {
            return Err(Error::NonFinite(
                "chain output (schedule or model mismatch?)".into(),
            ));
        }
        Ok(out)
    }

    /// Classifier gradient at `clamp01(base)`, masked by the clamp subgradient.
    fn base_gradient(&self, base: &Sample) -> Result<Sample> {
        let g = input_gradient(self.classifier, &clamp01(base), self.label)?;
        g.zip_with(&clamp_mask(base), |a, m| a * m)
    }

    fn rgf(&self, base: &Sample, delta: &Sample, cfg: &AttackConfig, iteration: usize) -> Result<Sample> {
        let g_base = self.base_gradient(base)?;
        let seed = rng::derive_seed(cfg.rng_seed, &[QUERY_STREAM, iteration as u64]);
        rgf_estimate(
            |d: &Sample| self.chain(d),
            base,
            delta,
            &g_base,
            cfg.rgf_queries,
            cfg.rgf_sigma,
            seed,
        )
    }

    fn skip(&self, base: &Sample) -> Result<Sample> {
        let scale = 1.0 / self.schedule.alpha_bar(self.schedule.steps()).sqrt();
        Ok(self.base_gradient(base)?.scale(scale))
    }
}

/// RGF gradient of the loss through `clamp01 ∘ D` at `delta`. Costs
/// `(N + 1) T` chain steps. `iteration` selects the query substream.
#[allow(clippy::too_many_arguments)]
pub fn rgf_gradient(
    stack: &NoiseMapStack,
    model: &DenoiserModel,
    classifier: &Classifier,
    label: usize,
    cfg: &AttackConfig,
    delta: &Sample,
    schedule: &NoiseSchedule,
    iteration: usize,
) -> Result<Sample> {
    cfg.validate()?;
    let target = Target { stack, model, classifier, schedule, label };
    let base = target.chain(delta)?;
    target.rgf(&base, delta, cfg, iteration)
}

/// Skip-gradient baseline: the classifier gradient scaled by `1/sqrt(alpha_bar_T)`.
pub fn skip_gradient(
    stack: &NoiseMapStack,
    model: &DenoiserModel,
    classifier: &Classifier,
    label: usize,
    delta: &Sample,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    let target = Target { stack, model, classifier, schedule, label };
    let base = target.chain(delta)?;
    target.skip(&base)
}

/// Inverts `x0` and then attacks its top latent.
///
/// Iterate `k` is evaluated once (one trace row, `iter = k`); if the
/// prediction has flipped and early exit is on, or `k` reached the budget,
/// that evaluation is the final output. Otherwise a gradient is estimated,
/// accumulated with momentum and a projected sign step is taken.
#[allow(clippy::too_many_arguments)]
pub fn run_attack(
    x0: &Sample,
    label: usize,
    model: &DenoiserModel,
    classifier: &Classifier,
    schedule: &NoiseSchedule,
    cond: &Condition,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    cfg.validate()?;
    if label >= classifier.classes() {
        return Err(Error::LabelOutOfRange { label, classes: classifier.classes() });
    }
    let seed = rng::derive_seed(cfg.rng_seed, &[INVERT_STREAM]);
    let stack = invert(x0, cond, model, schedule, seed)?;
    attack_stack(x0, &stack, label, model, classifier, schedule, cfg)
}

/// The outer loop of [`run_attack`] on an already inverted stack.
pub fn attack_stack(
    x0: &Sample,
    stack: &NoiseMapStack,
    label: usize,
    model: &DenoiserModel,
    classifier: &Classifier,
    schedule: &NoiseSchedule,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    cfg.validate()?;
    let target = Target { stack, model, classifier, schedule, label };
    let shape = x0.shape();
    let mut delta = Sample::zeros(shape);
    let mut g = Sample::zeros(shape);
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let mut reconstruction = None;
    let mut k = 0;
    loop {
        let base = target.chain(&delta)?;
        let xhat = clamp01(&base);
        let out = forward_loss(classifier, &xhat, label)?;
        let linf_delta = delta.norm_linf();
        assert!(linf_delta <= cfg.budget, "perturbation left the budget ball");
        trace.push(TraceRow {
            iter: k,
            loss: out.loss,
            pred: out.predicted,
            linf_delta,
            l2_image: xhat.sub(x0)?.norm_l2(),
        });
        let reconstruction = reconstruction.get_or_insert_with(|| xhat.clone()).clone();
        let flipped = out.predicted != label;
        if (flipped && cfg.early_exit) || k == cfg.iterations {
            let metrics = MetricReport::compare(x0, &xhat)?;
            return Ok(AttackResult {
                adversarial: xhat,
                reconstruction,
                delta,
                success: flipped,
                label,
                clean_pred: trace[0].pred,
                final_pred: out.predicted,
                iterations_used: k,
                trace,
                metrics,
            });
        }
        k += 1;
        let grad = match cfg.estimator {
            Estimator::Rgf => target.rgf(&base, &delta, cfg, k)?,
            Estimator::SkipGradient => target.skip(&base)?,
            Estimator::None => Sample::zeros(shape),
        };
        g = momentum_step(&g, &grad, cfg.momentum)?;
        let stepped = delta.zip_with(&g, |d, gi| d + cfg.step_size * sign0(gi))?;
        delta = project_linf(&stepped, cfg.budget);
    }
}

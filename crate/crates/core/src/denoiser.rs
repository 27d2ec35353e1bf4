//! Closed-form noise prediction for a known Gaussian-mixture data law.
//!
//! Under the forward marginal `x_t = a x_0 + b eps` with `a = sqrt(abar_t)`,
//! `b = sqrt(1 - abar_t)`, an isotropic component `N(m_k, s_k^2 I)` diffuses
//! to `N(a m_k, (a^2 s_k^2 + b^2) I)`. The posterior mean of `x_0` is then a
//! responsibility-weighted sum of per-component Wiener estimates, and the MMSE
//! noise prediction follows by inverting the marginal.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Sample, Shape};
use crate::schedule::NoiseSchedule;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Sample,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
    shape: Shape,
    label: Option<usize>,
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>, label: Option<usize>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidMixture("no components".into()))?;
        let shape = first.mean.shape();
        let mut total = 0.0;
        for (k, c) in components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::InvalidMixture(format!(
                    "component {k} weight {} outside (0, 1]",
                    c.weight
                )));
            }
            if !(c.std > 0.0 && c.std.is_finite()) {
                return Err(Error::InvalidMixture(format!(
                    "component {k} std {} must be positive",
                    c.std
                )));
            }
            if c.mean.shape() != shape {
                return Err(Error::InvalidMixture(format!(
                    "component {k} has shape {}, expected {shape}",
                    c.mean.shape()
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            components,
            shape,
            label,
        })
    }

    pub fn single(mean: Sample, std: f64) -> Result<Self> {
        Self::new(
            vec![Component {
                weight: 1.0,
                mean,
                std,
            }],
            None,
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    /// Log-density of the diffused mixture at `x` for signal/noise
    /// coefficients `(a, b)`.
    pub fn diffused_log_density(&self, x: &[f64], a: f64, b: f64) -> f64 {
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| component_log_likelihood(c, x, a, b))
            .collect();
        log_sum_exp(&logs)
    }
}

fn component_log_likelihood(c: &Component, x: &[f64], a: f64, b: f64) -> f64 {
    let var = a * a * c.std * c.std + b * b;
    let d = x.len() as f64;
    let sq: f64 = x
        .iter()
        .zip(c.mean.as_slice())
        .map(|(xi, mi)| {
            let r = xi - a * mi;
            r * r
        })
        .sum();
    c.weight.ln() - 0.5 * d * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * sq / var
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn posterior_mean_ab(gmm: &GaussianMixture, x: &[f64], a: f64, b: f64) -> Result<Vec<f64>> {
    let logs: Vec<f64> = gmm
        .components
        .iter()
        .map(|c| component_log_likelihood(c, x, a, b))
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::NonFinite(
            "mixture responsibilities vanished after stabilization".into(),
        ));
    }

    let mut out = vec![0.0; x.len()];
    for (c, u) in gmm.components.iter().zip(&unnorm) {
        let r = u / total;
        if r == 0.0 {
            continue;
        }
        let s2 = c.std * c.std;
        let gain = a * s2 / (a * a * s2 + b * b);
        for ((o, &xi), &mi) in out.iter_mut().zip(x).zip(c.mean.as_slice()) {
            *o += r * (mi + gain * (xi - a * mi));
        }
    }
    Ok(out)
}

/// Posterior mean `E[x_0 | x_t]` under the mixture prior.
pub fn gmm_posterior_mean(
    gmm: &GaussianMixture,
    x_t: &Sample,
    t: usize,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    schedule.check_step(t)?;
    x_t.ensure_shape(gmm.shape)?;
    let a = schedule.alpha_bar(t).sqrt();
    let b = schedule.one_minus_alpha_bar(t).sqrt();
    let pm = posterior_mean_ab(gmm, x_t.as_slice(), a, b)?;
    Ok(Sample::from_parts(x_t.shape(), pm))
}

/// Class condition standing in for a text embedding, plus guidance scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub class: Option<usize>,
    pub guidance_scale: f64,
}

impl Condition {
    pub fn null() -> Self {
        Self {
            class: None,
            guidance_scale: 0.0,
        }
    }

    pub fn class(id: usize, guidance_scale: f64) -> Self {
        Self {
            class: Some(id),
            guidance_scale,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassPrior {
    pub name: String,
    pub prior: f64,
    pub mixture: GaussianMixture,
}

#[derive(Debug, Default)]
struct CallCounter {
    conditional: AtomicU64,
    unconditional: AtomicU64,
}

/// Snapshot of how many mixture evaluations a model has served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CallCounts {
    pub conditional: u64,
    pub unconditional: u64,
}

impl CallCounts {
    pub fn total(&self) -> u64 {
        self.conditional + self.unconditional
    }
}

/// Class-conditional mixtures plus the prior-weighted null mixture.
#[derive(Debug)]
pub struct DenoiserModel {
    classes: Vec<ClassPrior>,
    null: GaussianMixture,
    calls: CallCounter,
}

impl Clone for DenoiserModel {
    fn clone(&self) -> Self {
        Self {
            classes: self.classes.clone(),
            null: self.null.clone(),
            calls: CallCounter::default(),
        }
    }
}

impl DenoiserModel {
    pub fn new(classes: Vec<ClassPrior>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidMixture("model has no classes".into()));
        }
        let shape = classes[0].mixture.shape();
        let prior_total: f64 = classes.iter().map(|c| c.prior).sum();
        if classes.iter().any(|c| !(c.prior > 0.0)) || (prior_total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMixture(format!(
                "class priors must be positive and sum to 1, got total {prior_total}"
            )));
        }
        let mut components = Vec::new();
        for (id, class) in classes.iter().enumerate() {
            if class.mixture.shape() != shape {
                return Err(Error::InvalidMixture(format!(
                    "class {id} has shape {}, expected {shape}",
                    class.mixture.shape()
                )));
            }
            components.extend(class.mixture.components().iter().map(|c| Component {
                weight: class.prior * c.weight,
                ..c.clone()
            }));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= total;
        }
        let null = GaussianMixture::new(components, None)?;
        Ok(Self {
            classes,
            null,
            calls: CallCounter::default(),
        })
    }

    /// Model with one class whose mixture is `gmm`.
    pub fn single(gmm: GaussianMixture) -> Result<Self> {
        Self::new(vec![ClassPrior {
            name: "class-0".into(),
            prior: 1.0,
            mixture: gmm,
        }])
    }

    pub fn shape(&self) -> Shape {
        self.null.shape()
    }

    pub fn classes(&self) -> &[ClassPrior] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn null_mixture(&self) -> &GaussianMixture {
        &self.null
    }

    pub fn class_mixture(&self, id: usize) -> Result<&GaussianMixture> {
        self.classes
            .get(id)
            .map(|c| &c.mixture)
            .ok_or(Error::UnknownClass(id))
    }

    pub fn validate_condition(&self, cond: &Condition) -> Result<()> {
        if !(cond.guidance_scale >= 0.0 && cond.guidance_scale.is_finite()) {
            return Err(Error::InvalidCondition(format!(
                "guidance scale {} must be finite and >= 0",
                cond.guidance_scale
            )));
        }
        match cond.class {
            Some(id) if id >= self.class_count() => Err(Error::UnknownClass(id)),
            None if cond.guidance_scale != 0.0 => Err(Error::InvalidCondition(
                "null condition with non-zero guidance scale".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn call_counts(&self) -> CallCounts {
        CallCounts {
            conditional: self.calls.conditional.load(Ordering::Relaxed),
            unconditional: self.calls.unconditional.load(Ordering::Relaxed),
        }
    }

    pub fn reset_call_counts(&self) {
        self.calls.conditional.store(0, Ordering::Relaxed);
        self.calls.unconditional.store(0, Ordering::Relaxed);
    }

    fn mixture_noise(
        &self,
        class: Option<usize>,
        x_t: &Sample,
        t: usize,
        schedule: &NoiseSchedule,
    ) -> Result<Sample> {
        let gmm = match class {
            Some(id) => {
                let gmm = self.class_mixture(id)?;
                self.calls.conditional.fetch_add(1, Ordering::Relaxed);
                gmm
            }
            None => {
                self.calls.unconditional.fetch_add(1, Ordering::Relaxed);
                &self.null
            }
        };
        let pm = gmm_posterior_mean(gmm, x_t, t, schedule)?;
        let a = schedule.alpha_bar(t).sqrt();
        let b = schedule.one_minus_alpha_bar(t).sqrt();
        Ok(Sample::from_parts(
            x_t.shape(),
            x_t.as_slice()
                .iter()
                .zip(pm.as_slice())
                .map(|(x, m)| (x - a * m) / b)
                .collect(),
        ))
    }
}

/// MMSE noise prediction under the mixture selected by `cond` (the null
/// mixture when `cond` carries no class). Guidance scale is ignored.
pub fn predict_noise(
    model: &DenoiserModel,
    x_t: &Sample,
    t: usize,
    cond: &Condition,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    model.mixture_noise(cond.class, x_t, t, schedule)
}

/// Classifier-free guidance: `eps(x) + s_g (eps(x, c) - eps(x))`, where the
/// unconditional branch uses the null mixture.
///
/// At `s_g = 0` and `s_g = 1` only the surviving branch is evaluated.
pub fn guided_noise(
    model: &DenoiserModel,
    x_t: &Sample,
    t: usize,
    cond: &Condition,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    let id = cond.class.ok_or_else(|| {
        Error::InvalidCondition("guidance requires a class condition".into())
    })?;
    model.validate_condition(cond)?;
    let s = cond.guidance_scale;
    if s == 0.0 {
        return model.mixture_noise(None, x_t, t, schedule);
    }
    if s == 1.0 {
        return model.mixture_noise(Some(id), x_t, t, schedule);
    }
    let uncond = model.mixture_noise(None, x_t, t, schedule)?;
    let cond_eps = model.mixture_noise(Some(id), x_t, t, schedule)?;
    uncond.zip_with(&cond_eps, |u, c| u + s * (c - u))
}

/// Noise prediction used inside the reverse chain: guided for class
/// conditions, plain null-mixture prediction otherwise.
pub fn chain_noise(
    model: &DenoiserModel,
    x_t: &Sample,
    t: usize,
    cond: &Condition,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    match cond.class {
        Some(_) => guided_noise(model, x_t, t, cond, schedule),
        None => {
            model.validate_condition(cond)?;
            predict_noise(model, x_t, t, cond, schedule)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::schedule::ScheduleConfig;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn schedule() -> NoiseSchedule {
        ScheduleConfig::new(20, 1e-3, 0.2).build().unwrap()
    }

    fn v(data: &[f64]) -> Sample {
        Sample::from_vec(data.to_vec()).unwrap()
    }

    fn two_class_model() -> DenoiserModel {
        let a = GaussianMixture::new(
            vec![
                Component { weight: 0.3, mean: v(&[0.2, 0.8, 0.1]), std: 0.1 },
                Component { weight: 0.7, mean: v(&[0.4, 0.6, 0.9]), std: 0.2 },
            ],
            Some(0),
        )
        .unwrap();
        let b = GaussianMixture::new(
            vec![Component { weight: 1.0, mean: v(&[0.9, 0.1, 0.5]), std: 0.15 }],
            Some(1),
        )
        .unwrap();
        DenoiserModel::new(vec![
            ClassPrior { name: "a".into(), prior: 0.4, mixture: a },
            ClassPrior { name: "b".into(), prior: 0.6, mixture: b },
        ])
        .unwrap()
    }

    #[test]
    fn mixture_validation() {
        let m = v(&[0.0, 0.0]);
        let bad_weights = GaussianMixture::new(
            vec![
                Component { weight: 0.5, mean: m.clone(), std: 1.0 },
                Component { weight: 0.4, mean: m.clone(), std: 1.0 },
            ],
            None,
        );
        assert!(matches!(bad_weights, Err(Error::InvalidMixture(_))));
        assert!(GaussianMixture::single(m.clone(), 0.0).is_err());
        let mixed = GaussianMixture::new(
            vec![
                Component { weight: 0.5, mean: m.clone(), std: 1.0 },
                Component { weight: 0.5, mean: v(&[0.0]), std: 1.0 },
            ],
            None,
        );
        assert!(mixed.is_err());
    }

    #[test]
    fn null_mixture_weights_are_prior_products() {
        let model = two_class_model();
        let w: Vec<f64> = model.null_mixture().components().iter().map(|c| c.weight).collect();
        let want = [0.4 * 0.3, 0.4 * 0.7, 0.6];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_prior_returns_its_mean() {
        let s = schedule();
        let m = v(&[0.3, -0.7]);
        let gmm = GaussianMixture::single(m.clone(), 1e-12).unwrap();
        let x = v(&[1.5, 0.2]);
        for t in [1, 5, 20] {
            let pm = gmm_posterior_mean(&gmm, &x, t, &s).unwrap();
            assert!(pm.max_abs_diff(&m).unwrap() < 1e-6);
        }
    }

    #[test]
    fn posterior_mean_at_prior_mode_is_the_mode() {
        let s = schedule();
        let m = v(&[0.3, -0.7, 0.25]);
        let gmm = GaussianMixture::single(m.clone(), 0.4).unwrap();
        for t in [1, 7, 20] {
            let x = m.scale(s.alpha_bar(t).sqrt());
            let pm = gmm_posterior_mean(&gmm, &x, t, &s).unwrap();
            assert!(pm.max_abs_diff(&m).unwrap() < 1e-15);
        }
    }

    #[test]
    fn posterior_mean_matches_importance_sampling() {
        // Monte-Carlo oracle: sample x0 from the prior, weight by the forward
        // likelihood of x_t, average.
        let s = schedule();
        let gmm = GaussianMixture::new(
            vec![
                Component { weight: 0.35, mean: v(&[-1.0, 0.5]), std: 0.3 },
                Component { weight: 0.65, mean: v(&[1.0, -0.5]), std: 0.5 },
            ],
            None,
        )
        .unwrap();
        let t = 12;
        let a = s.alpha_bar(t).sqrt();
        let b = s.one_minus_alpha_bar(t).sqrt();
        let x = [0.3, 0.1];
        let got = gmm_posterior_mean(&gmm, &v(&x), t, &s).unwrap();

        let mut rng = rng::seeded(2024);
        let n = 1_000_000;
        let (mut sw, mut sw2) = (0.0, 0.0);
        let mut swx = [0.0; 2];
        let mut swx2 = [0.0; 2];
        for _ in 0..n {
            let c = if rng.random::<f64>() < 0.35 { &gmm.components()[0] } else { &gmm.components()[1] };
            let mut x0 = [0.0; 2];
            for i in 0..2 {
                let z: f64 = StandardNormal.sample(&mut rng);
                x0[i] = c.mean.as_slice()[i] + c.std * z;
            }
            let sq: f64 = (0..2).map(|i| (x[i] - a * x0[i]).powi(2)).sum();
            let w = (-0.5 * sq / (b * b)).exp();
            sw += w;
            sw2 += w * w;
            for i in 0..2 {
                swx[i] += w * x0[i];
                swx2[i] += w * x0[i] * x0[i];
            }
        }
        let ess = sw * sw / sw2;
        for i in 0..2 {
            let mean = swx[i] / sw;
            let var = swx2[i] / sw - mean * mean;
            let se = (var / ess).sqrt();
            let diff = (got.as_slice()[i] - mean).abs();
            assert!(diff <= 3.0 * se, "component {i}: {} vs {mean} (se {se})", got.as_slice()[i]);
        }
    }

    #[test]
    fn predict_noise_inverts_delta_prior() {
        let s = schedule();
        let m = v(&[0.3, -0.7]);
        let model = DenoiserModel::single(GaussianMixture::single(m.clone(), 1e-12).unwrap()).unwrap();
        let noise = v(&[0.9, -1.3]);
        for t in [1, 10, 20] {
            let x = m.scale(s.alpha_bar(t).sqrt()).add(&noise.scale(s.one_minus_alpha_bar(t).sqrt())).unwrap();
            let eps = predict_noise(&model, &x, t, &Condition::null(), &s).unwrap();
            assert!(eps.max_abs_diff(&noise).unwrap() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn null_and_class_agree_for_single_class_model() {
        let s = schedule();
        let model = DenoiserModel::single(GaussianMixture::single(v(&[0.1, 0.2]), 0.3).unwrap()).unwrap();
        let x = v(&[0.5, -0.4]);
        let a = predict_noise(&model, &x, 4, &Condition::null(), &s).unwrap();
        let b = predict_noise(&model, &x, 4, &Condition::class(0, 1.0), &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_class_is_rejected() {
        let s = schedule();
        let model = two_class_model();
        let x = v(&[0.0, 0.0, 0.0]);
        assert!(matches!(
            predict_noise(&model, &x, 3, &Condition::class(5, 1.0), &s),
            Err(Error::UnknownClass(5))
        ));
    }

    #[test]
    fn tweedie_identity_holds() {
        // Oracle: eps = -sqrt(1 - abar) * grad log p_t, gradient by central
        // differences of the exact diffused log-density.
        let s = schedule();
        let model = two_class_model();
        let mut rng = rng::seeded(5);
        for trial in 0..20 {
            let t = 1 + trial % 20;
            let x = rng::standard_normal(&mut rng, Shape::flat(3)).scale(0.8);
            let a = s.alpha_bar(t).sqrt();
            let b = s.one_minus_alpha_bar(t).sqrt();
            for (class, gmm) in [(None, model.null_mixture()), (Some(0), model.class_mixture(0).unwrap()), (Some(1), model.class_mixture(1).unwrap())] {
                let cond = Condition { class, guidance_scale: 1.0 };
                let eps = predict_noise(&model, &x, t, &cond, &s).unwrap();
                let h = 1e-5 * b.max(1e-2);
                let mut oracle = vec![0.0; 3];
                for i in 0..3 {
                    let mut xp = x.as_slice().to_vec();
                    let mut xm = xp.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let g = (gmm.diffused_log_density(&xp, a, b) - gmm.diffused_log_density(&xm, a, b)) / (2.0 * h);
                    oracle[i] = -b * g;
                }
                let num: f64 = eps.as_slice().iter().zip(&oracle).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                let den: f64 = oracle.iter().map(|q| q * q).sum::<f64>().sqrt();
                assert!(num / den <= 1e-5, "t={t} class={class:?}: rel {}", num / den);
            }
        }
    }

    #[test]
    fn guidance_collapses_and_is_affine() {
        let s = schedule();
        let model = two_class_model();
        let x = v(&[0.35, 0.4, 0.2]);
        let t = 9;
        let uncond = predict_noise(&model, &x, t, &Condition::null(), &s).unwrap();
        let cond = predict_noise(&model, &x, t, &Condition::class(0, 1.0), &s).unwrap();
        let g0 = guided_noise(&model, &x, t, &Condition::class(0, 0.0), &s).unwrap();
        let g1 = guided_noise(&model, &x, t, &Condition::class(0, 1.0), &s).unwrap();
        assert!(g0.max_abs_diff(&uncond).unwrap() <= 1e-12);
        assert!(g1.max_abs_diff(&cond).unwrap() <= 1e-12);

        let g75 = guided_noise(&model, &x, t, &Condition::class(0, 7.5), &s).unwrap();
        for i in 0..3 {
            let u = uncond.as_slice()[i];
            let c = cond.as_slice()[i];
            assert!((g75.as_slice()[i] - (u + 7.5 * (c - u))).abs() <= 1e-12);
        }

        let diff = cond.sub(&uncond).unwrap();
        for scale in [0.5, 3.0, 7.5] {
            let g = guided_noise(&model, &x, t, &Condition::class(0, scale), &s).unwrap();
            let offset = g.sub(&uncond).unwrap();
            for i in 0..3 {
                assert!((offset.as_slice()[i] - scale * diff.as_slice()[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn guidance_requires_class() {
        let s = schedule();
        let model = two_class_model();
        let x = v(&[0.0, 0.0, 0.0]);
        assert!(guided_noise(&model, &x, 2, &Condition::null(), &s).is_err());
        let bad = Condition { class: None, guidance_scale: 2.0 };
        assert!(matches!(chain_noise(&model, &x, 2, &bad, &s), Err(Error::InvalidCondition(_))));
    }

    #[test]
    fn prediction_is_pure_and_counted() {
        let s = schedule();
        let model = two_class_model();
        let x = v(&[0.1, 0.9, 0.3]);
        let a = predict_noise(&model, &x, 5, &Condition::class(1, 1.0), &s).unwrap();
        let b = predict_noise(&model, &x, 5, &Condition::class(1, 1.0), &s).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        guided_noise(&model, &x, 5, &Condition::class(1, 2.0), &s).unwrap();
        assert_eq!(model.call_counts(), CallCounts { conditional: 3, unconditional: 1 });
        model.reset_call_counts();
        assert_eq!(model.call_counts().total(), 0);
    }

    #[test]
    fn random_probe_stays_finite_far_from_data() {
        let s = schedule();
        let model = two_class_model();
        let mut r = rng::seeded(9);
        for _ in 0..50 {
            let x = rng::standard_normal(&mut r, Shape::flat(3)).scale(50.0);
            for t in [1, 20] {
                let eps = predict_noise(&model, &x, t, &Condition::null(), &s).unwrap();
                assert!(eps.is_finite());
            }
        }
    }
}

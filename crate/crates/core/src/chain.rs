//! Forward marginal, reverse-step means, edit-friendly inversion and the
//! chained denoiser `D`.
//!
//! Inversion noises the clean image independently at every level, then
//! solves each reverse step for the noise map that carries the chain from one
//! auxiliary state to the next. Replaying the chain with those maps held fixed
//! reproduces the image; perturbing only the top latent yields nearby images
//! that keep the low-level detail pinned by the maps.

use crate::denoiser::{chain_noise, Condition, DenoiserModel};
use crate::error::{Error, Result};
use crate::rng;
use crate::sample::Sample;
use crate::schedule::{NoiseSchedule, SolverTarget};

/// `sqrt(abar_t) x0 + sqrt(1 - abar_t) noise`.
pub fn forward_marginal_sample(
    x0: &Sample,
    t: usize,
    noise: &Sample,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    schedule.check_step(t)?;
    let a = schedule.alpha_bar(t).sqrt();
    let b = schedule.one_minus_alpha_bar(t).sqrt();
    x0.zip_with(noise, |x, n| a * x + b * n)
}

/// First-order DDPM mean with stochasticity `sigma_ddpm[t]`.
pub fn ddpm_mu(
    model: &DenoiserModel,
    x_t: &Sample,
    t: usize,
    cond: &Condition,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    schedule.check_step(t)?;
    let sigma = schedule.sigma_ddpm(t);
    let residual = schedule.one_minus_alpha_bar(t - 1) - sigma * sigma;
    if residual < 0.0 {
        return Err(Error::InvalidEta { t, residual });
    }
    let eps = chain_noise(model, x_t, t, cond, schedule)?;
    let a_prev = schedule.alpha_bar(t - 1).sqrt();
    let a = schedule.alpha_bar(t).sqrt();
    let b = schedule.one_minus_alpha_bar(t).sqrt();
    let dir = residual.sqrt();
    x_t.zip_with(&eps, |x, e| a_prev * (x - b * e) / a + dir * e)
}

/// Coefficients of the three-term second-order mean at step `t`:
/// `c_x x_t + c_pred P(x_t) + c_corr (P(x_{t+1}) - P(x_t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverCoefficients {
    pub state: f64,
    pub prediction: f64,
    /// Zero at the top step, where there is no previous state.
    pub correction: f64,
}

pub fn solver_coefficients(
    schedule: &NoiseSchedule,
    t: usize,
    with_correction: bool,
) -> Result<SolverCoefficients> {
    schedule.check_step(t)?;
    let h_prev = schedule.h(t - 1);
    let damp = -(-2.0 * h_prev).exp_m1();
    let sqrt_ab_prev = schedule.alpha_bar(t - 1).sqrt();
    let state = (schedule.one_minus_alpha_bar(t - 1).sqrt()
        / schedule.one_minus_alpha_bar(t).sqrt())
        * (-h_prev).exp();
    let prediction = sqrt_ab_prev * damp;
    let correction = if with_correction && t < schedule.steps() {
        if h_prev == 0.0 {
            return Err(Error::ScheduleDegenerate {
                t,
                reason: "h_{t-1} = 0 in the correction ratio",
            });
        }
        0.5 * sqrt_ab_prev * damp * (-schedule.h(t) / h_prev)
    } else {
        0.0
    };
    Ok(SolverCoefficients {
        state,
        prediction,
        correction,
    })
}

/// Model output consumed by the solver mean at level `t`, given the noise
/// prediction there.
fn solver_target_output(schedule: &NoiseSchedule, t: usize, x_t: &Sample, eps: Sample) -> Sample {
    match schedule.solver_target() {
        SolverTarget::Noise => eps,
        SolverTarget::Data => {
            let a = schedule.alpha_bar(t).sqrt();
            let b = schedule.one_minus_alpha_bar(t).sqrt();
            Sample::from_parts(
                x_t.shape(),
                x_t.as_slice()
                    .iter()
                    .zip(eps.as_slice())
                    .map(|(x, e)| (x - b * e) / a)
                    .collect(),
            )
        }
    }
}

fn model_output(
    model: &DenoiserModel,
    x: &Sample,
    t: usize,
    cond: &Condition,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    let eps = chain_noise(model, x, t, cond, schedule)?;
    Ok(solver_target_output(schedule, t, x, eps))
}

fn combine_mean(
    coeffs: SolverCoefficients,
    x_t: &Sample,
    out_t: &Sample,
    out_next: Option<&Sample>,
) -> Sample {
    let SolverCoefficients {
        state,
        prediction,
        correction,
    } = coeffs;
    let data = match out_next {
        Some(next) => x_t
            .as_slice()
            .iter()
            .zip(out_t.as_slice())
            .zip(next.as_slice())
            .map(|((x, p), pn)| state * x + prediction * p + correction * (pn - p))
            .collect(),
        None => x_t
            .as_slice()
            .iter()
            .zip(out_t.as_slice())
            .map(|(x, p)| state * x + prediction * p)
            .collect(),
    };
    Sample::from_parts(x_t.shape(), data)
}

/// Second-order SDE solver mean `mu_t(x_t, x_{t+1}, c)`.
///
/// `x_next` is the state at level `t + 1`; it must be `None` at the top step
/// `t = T`, which falls back to the first-order (two-term) update.
pub fn solver_mu(
    model: &DenoiserModel,
    x_t: &Sample,
    x_next: Option<&Sample>,
    t: usize,
    cond: &Condition,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    schedule.check_step(t)?;
    if t == schedule.steps() && x_next.is_some() {
        return Err(Error::InvalidInput(
            "no state above the top step; x_next must be absent at t = T".into(),
        ));
    }
    let coeffs = solver_coefficients(schedule, t, x_next.is_some())?;
    let out_t = model_output(model, x_t, t, cond, schedule)?;
    let out_next = match x_next {
        Some(x) => {
            x.ensure_shape(x_t.shape())?;
            Some(model_output(model, x, t + 1, cond, schedule)?)
        }
        None => None,
    };
    Ok(combine_mean(coeffs, x_t, &out_t, out_next.as_ref()))
}

/// Edit-friendly latents extracted from one image.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMapStack {
    /// Top latent `x_T`.
    pub x_top: Sample,
    /// `z[t - 1]` is the noise map of step `t`.
    pub z: Vec<Sample>,
    /// Auxiliary states `aux_x[0..=T]`, as re-synthesized by the chain.
    pub aux_x: Vec<Sample>,
    pub schedule_hash: u64,
    pub cond: Condition,
}

impl NoiseMapStack {
    pub fn steps(&self) -> usize {
        self.z.len()
    }

    /// Noise map of step `t` (1-based).
    pub fn z(&self, t: usize) -> &Sample {
        &self.z[t - 1]
    }

    pub fn check_schedule(&self, schedule: &NoiseSchedule) -> Result<()> {
        if self.schedule_hash != schedule.hash() || self.steps() != schedule.steps() {
            return Err(Error::StackMismatch {
                stack: self.schedule_hash,
                schedule: schedule.hash(),
            });
        }
        Ok(())
    }
}

/// Extracts noise maps for `x0` such that [`denoise_chain`] with zero
/// perturbation reproduces it.
///
/// Each level is noised with its own draw `eps_t` (substream `t` of
/// `rng_seed`); then, from the top down, the step's noise map is solved from
/// the gap between the auxiliary state below and the solver mean.
pub fn invert(
    x0: &Sample,
    cond: &Condition,
    model: &DenoiserModel,
    schedule: &NoiseSchedule,
    rng_seed: u64,
) -> Result<NoiseMapStack> {
    x0.ensure_shape(model.shape())?;
    if let Some(v) = x0.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!(
            "clean image entries must lie in [0, 1], found {v}"
        )));
    }
    model.validate_condition(cond)?;
    let steps = schedule.steps();
    let shape = x0.shape();

    let mut aux = Vec::with_capacity(steps + 1);
    aux.push(x0.clone());
    for t in 1..=steps {
        let mut r = rng::substream(rng_seed, &[t as u64]);
        let noise = rng::standard_normal(&mut r, shape);
        aux.push(forward_marginal_sample(x0, t, &noise, schedule)?);
    }

    let mut z = vec![Sample::zeros(shape); steps];
    let mut out_next: Option<Sample> = None;
    for t in (1..=steps).rev() {
        let scale = schedule.injection_scale(t)?;
        let coeffs = solver_coefficients(schedule, t, out_next.is_some())?;
        let out_t = model_output(model, &aux[t], t, cond, schedule)?;
        let mean = combine_mean(coeffs, &aux[t], &out_t, out_next.as_ref());
        let zt = aux[t - 1].zip_with(&mean, |target, m| (target - m) / scale)?;
        if !zt.is_finite() {
            return Err(Error::NonFinite(format!("noise map at step {t}")));
        }
        // Re-synthesize the lower state exactly as the chain will.
        aux[t - 1] = mean.zip_with(&zt, |m, zi| m + scale * zi)?;
        z[t - 1] = zt;
        out_next = Some(out_t);
    }

    Ok(NoiseMapStack {
        x_top: aux[steps].clone(),
        z,
        aux_x: aux,
        schedule_hash: schedule.hash(),
        cond: *cond,
    })
}

/// The chained denoiser `D(x_T + delta, {z_t}, c, T)`.
///
/// Runs every solver step from `T` down to 1 with the stored noise maps held
/// fixed and returns the unclamped `x_0`.
pub fn denoise_chain(
    stack: &NoiseMapStack,
    model: &DenoiserModel,
    delta: Option<&Sample>,
    schedule: &NoiseSchedule,
) -> Result<Sample> {
    stack.check_schedule(schedule)?;
    let mut x = match delta {
        Some(d) => stack.x_top.add(d)?,
        None => stack.x_top.clone(),
    };
    let mut out_next: Option<Sample> = None;
    for t in (1..=schedule.steps()).rev() {
        let scale = schedule.injection_scale(t)?;
        let coeffs = solver_coefficients(schedule, t, out_next.is_some())?;
        let out_t = model_output(model, &x, t, &stack.cond, schedule)?;
        let mean = combine_mean(coeffs, &x, &out_t, out_next.as_ref());
        x = mean.zip_with(stack.z(t), |m, zi| m + scale * zi)?;
        out_next = Some(out_t);
    }
    Ok(x)
}

//! Time discretization shared by the forward process, both reverse steps and
//! the second-order solver.
//!
//! All arrays are indexed by step `t` directly: entry 0 is the clean level
//! (`alpha_bar[0] = 1`), entries `1..=T` are the noisy levels. Step sizes are
//! the exception: `h[s]` for `s = 0..T` is the size of the solver step from
//! level `s + 1` down to level `s`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAX_STEPS: usize = 10_000;

/// How solver step sizes are derived from the variance schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HFormula {
    /// `h_s = lambda_s - lambda_{s+1}` with `lambda` the half-log-SNR.
    #[default]
    LogSnrDiff,
    /// `h_s = r_s - r_{s+1}` with `r_s = ln(sqrt(abar_s)) / ln(sqrt(1 - abar_s))`.
    ///
    /// This form is negative on every monotone schedule, so `1 - e^{-2h}` is
    /// negative too; the solver noise scale uses its magnitude.
    LogRatio,
}

/// Which model output drives the solver mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverTarget {
    /// Data prediction `(x_t - sqrt(1 - abar_t) eps) / sqrt(abar_t)`, as in the
    /// multistep SDE solver the mean is taken from.
    #[default]
    Data,
    /// Raw noise prediction substituted verbatim into the same three-term mean.
    Noise,
}

/// Serializable schedule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(rename = "T")]
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    #[serde(default)]
    pub eta_ddpm: f64,
    #[serde(default)]
    pub h_formula: HFormula,
    #[serde(default)]
    pub solver_target: SolverTarget,
}

impl ScheduleConfig {
    pub fn new(steps: usize, beta_start: f64, beta_end: f64) -> Self {
        Self {
            steps,
            beta_start,
            beta_end,
            eta_ddpm: 0.0,
            h_formula: HFormula::default(),
            solver_target: SolverTarget::default(),
        }
    }

    pub fn with_h_formula(mut self, h_formula: HFormula) -> Self {
        self.h_formula = h_formula;
        self
    }

    pub fn with_solver_target(mut self, target: SolverTarget) -> Self {
        self.solver_target = target;
        self
    }

    pub fn with_eta_ddpm(mut self, eta: f64) -> Self {
        self.eta_ddpm = eta;
        self
    }

    pub fn build(&self) -> Result<NoiseSchedule> {
        NoiseSchedule::build(self)
    }
}

#[derive(Debug, Clone)]
pub struct NoiseSchedule {
    config: ScheduleConfig,
    beta: Vec<f64>,
    alpha_bar: Vec<f64>,
    one_minus_alpha_bar: Vec<f64>,
    sigma_ddpm: Vec<f64>,
    sigma_solver: Vec<f64>,
    lambda: Vec<f64>,
    h: Vec<f64>,
    hash: u64,
}

/// Neumaier-compensated running sums.
fn compensated_prefix_sums(terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

impl NoiseSchedule {
    pub fn build(config: &ScheduleConfig) -> Result<Self> {
        let &ScheduleConfig {
            steps,
            beta_start,
            beta_end,
            eta_ddpm,
            h_formula,
            ..
        } = config;
        if !(2..=MAX_STEPS).contains(&steps) {
            return Err(Error::InvalidSchedule(format!(
                "T = {steps} outside 2..={MAX_STEPS}"
            )));
        }
        if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "beta endpoints must satisfy 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
            )));
        }
        if !(eta_ddpm >= 0.0 && eta_ddpm.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "eta_ddpm must be finite and >= 0, got {eta_ddpm}"
            )));
        }

        let span = (steps - 1) as f64;
        let mut beta = vec![0.0];
        beta.extend(
            (0..steps).map(|i| beta_start + (beta_end - beta_start) * (i as f64 / span)),
        );

        // log(abar_t) as a compensated sum of log1p(-beta); abar and 1 - abar
        // are recovered with exp / expm1 to keep precision at both ends.
        let log_ab = compensated_prefix_sums(beta[1..].iter().map(|b| (-b).ln_1p()));
        if log_ab.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSchedule(
                "alpha_bar is not strictly decreasing".into(),
            ));
        }
        let alpha_bar: Vec<f64> = log_ab.iter().map(|l| l.exp()).collect();
        let one_minus_alpha_bar: Vec<f64> = log_ab.iter().map(|l| -l.exp_m1()).collect();

        let lambda: Vec<f64> = log_ab
            .iter()
            .zip(&one_minus_alpha_bar)
            .map(|(&l, &oma)| 0.5 * (l - oma.ln()))
            .collect();

        let h: Vec<f64> = match h_formula {
            HFormula::LogSnrDiff => lambda.windows(2).map(|w| w[0] - w[1]).collect(),
            HFormula::LogRatio => {
                let ratio: Vec<f64> = log_ab
                    .iter()
                    .zip(&one_minus_alpha_bar)
                    .map(|(&l, &oma)| (0.5 * l) / (0.5 * oma.ln()))
                    .collect();
                ratio.windows(2).map(|w| w[0] - w[1]).collect()
            }
        };

        let mut sigma_ddpm = vec![0.0];
        let mut sigma_solver = vec![0.0];
        for t in 1..=steps {
            sigma_ddpm.push(
                eta_ddpm * beta[t] * one_minus_alpha_bar[t - 1] / one_minus_alpha_bar[t],
            );
            let damp = (-(-2.0 * h[t - 1]).exp_m1()).abs();
            sigma_solver.push(one_minus_alpha_bar[t - 1].sqrt() * damp.sqrt());
        }

        Ok(Self {
            config: *config,
            beta,
            alpha_bar,
            one_minus_alpha_bar,
            sigma_ddpm,
            sigma_solver,
            lambda,
            h,
            hash: config_hash(config),
        })
    }

    pub fn config(&self) -> &ScheduleConfig {
        &self.config
    }

    pub fn steps(&self) -> usize {
        self.config.steps
    }

    pub fn h_formula(&self) -> HFormula {
        self.config.h_formula
    }

    pub fn solver_target(&self) -> SolverTarget {
        self.config.solver_target
    }

    pub fn eta_ddpm(&self) -> f64 {
        self.config.eta_ddpm
    }

    /// Stable identifier of the configuration, recorded in noise-map files.
    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps() {
            return Err(Error::StepOutOfRange {
                t,
                steps: self.steps(),
            });
        }
        Ok(())
    }

    /// `beta[t]` for `t = 1..=T`; entry 0 is a zero placeholder.
    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    /// `alpha_bar[t]` for `t = 0..=T`.
    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t]
    }

    /// `1 - alpha_bar[t]`, computed without cancellation.
    pub fn one_minus_alpha_bar(&self, t: usize) -> f64 {
        self.one_minus_alpha_bar[t]
    }

    /// DDPM stochasticity `eta * beta_t * (1 - abar_{t-1}) / (1 - abar_t)`.
    pub fn sigma_ddpm(&self, t: usize) -> f64 {
        self.sigma_ddpm[t]
    }

    pub fn sigma_solvers(&self) -> &[f64] {
        &self.sigma_solver
    }

    /// Solver noise scale `sqrt(1 - abar_{t-1}) sqrt(1 - e^{-2 h_{t-1}})`.
    pub fn sigma_solver(&self, t: usize) -> f64 {
        self.sigma_solver[t]
    }

    /// Scale applied to the stored noise map at step `t`.
    ///
    /// Equal to [`Self::sigma_solver`] except at the terminal step, where
    /// `abar_0 = 1` forces the solver scale to zero; there the noise map holds
    /// the raw residual and the scale is 1.
    pub fn injection_scale(&self, t: usize) -> Result<f64> {
        self.check_step(t)?;
        let sigma = self.sigma_solver[t];
        if sigma > 0.0 {
            Ok(sigma)
        } else if t == 1 {
            Ok(1.0)
        } else {
            Err(Error::ScheduleDegenerate {
                t,
                reason: "solver noise scale is zero",
            })
        }
    }

    /// Half-log-SNR array; `lambda[0] = +inf`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// Step sizes `h[s]`, `s = 0..T`.
    pub fn step_sizes(&self) -> &[f64] {
        &self.h
    }

    /// `h_s` for `s = 0..T`.
    pub fn h(&self, s: usize) -> f64 {
        self.h[s]
    }
}

/// Half-log-SNR `ln sqrt(abar_t) - ln sqrt(1 - abar_t)` for `1 <= t <= T`.
pub fn half_log_snr(schedule: &NoiseSchedule, t: usize) -> Result<f64> {
    schedule.check_step(t)?;
    Ok(schedule.lambda[t])
}

fn config_hash(config: &ScheduleConfig) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((config.steps as u64).to_le_bytes());
    hasher.update(config.beta_start.to_bits().to_le_bytes());
    hasher.update(config.beta_end.to_bits().to_le_bytes());
    hasher.update(config.eta_ddpm.to_bits().to_le_bytes());
    hasher.update([config.h_formula as u8, config.solver_target as u8]);
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

//! Edit-friendly diffusion inversion and latent-space adversarial
//! perturbation over analytically tractable diffusion priors.
//!
//! The pipeline has two phases. [`chain::invert`] maps a clean image onto a
//! stack of noise maps such that replaying the second-order reverse chain
//! reproduces the image exactly. [`attack::run_attack`] then perturbs the top
//! latent inside an ℓ∞ ball, estimating gradients through the chain with
//! random gradient-free queries.
//!
//! The learned noise predictor of a real diffusion model is replaced by the
//! closed-form MMSE predictor of a known Gaussian mixture ([`denoiser`]), and
//! text conditioning by a discrete class condition with a null token.

pub mod attack;
pub mod chain;
pub mod classifier;
pub mod container;
pub mod data;
pub mod denoiser;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod sample;
pub mod schedule;

pub use error::{Error, Result};
pub use sample::{Sample, Shape};

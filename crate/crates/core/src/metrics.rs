//! Reference-based consistency metrics and attack accounting.

use serde::Serialize;

use crate::attack::AttackResult;
use crate::error::{Error, Result};
use crate::sample::Sample;

const WINDOW: usize = 11;
const WINDOW_STD: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const DYNAMIC_RANGE: f64 = 1.0;

/// Peak signal-to-noise ratio in dB for samples in `[0, 1]`.
///
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &Sample, b: &Sample) -> Result<f64> {
    b.ensure_shape(a.shape())?;
    let sse: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let mse = sse / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (DYNAMIC_RANGE * DYNAMIC_RANGE / mse).log10())
}

fn gaussian_window() -> Vec<f64> {
    let half = (WINDOW - 1) as f64 / 2.0;
    let g: Vec<f64> = (0..WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-(d * d) / (2.0 * WINDOW_STD * WINDOW_STD)).exp()
        })
        .collect();
    let mut w: Vec<f64> = g.iter().flat_map(|gi| g.iter().map(move |gj| gi * gj)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// SSIM of one weighted patch given its weighted moments.
fn ssim_from_moments(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64) -> f64 {
    let c1 = (K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (K2 * DYNAMIC_RANGE).powi(2);
    ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

/// Weighted moments over positions `idx` with weights `w`.
fn patch_ssim(a: &[f64], b: &[f64], idx: impl Iterator<Item = (usize, f64)> + Clone) -> f64 {
    let (mut mx, mut my) = (0.0, 0.0);
    for (i, w) in idx.clone() {
        mx += w * a[i];
        my += w * b[i];
    }
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (i, w) in idx {
        let dx = a[i] - mx;
        let dy = b[i] - my;
        vx += w * dx * dx;
        vy += w * dy * dy;
        cxy += w * dx * dy;
    }
    ssim_from_moments(mx, my, vx, vy, cxy)
}

/// Mean structural similarity: 11x11 Gaussian window (std 1.5) over every
/// valid position, `K1 = 0.01`, `K2 = 0.03`, range 1, channels averaged.
///
/// Images smaller than the window in either dimension are scored with one
/// global uniform window per channel.
pub fn ssim(a: &Sample, b: &Sample) -> Result<f64> {
    b.ensure_shape(a.shape())?;
    let shape = a.shape();
    let (h, w, c) = (shape.height, shape.width, shape.channels);
    let (xa, xb) = (a.as_slice(), b.as_slice());
    let mut total = 0.0;
    for ch in 0..c {
        let at = |row: usize, col: usize| (row * w + col) * c + ch;
        if h < WINDOW || w < WINDOW {
            let uniform = 1.0 / (h * w) as f64;
            let idx = (0..h).flat_map(|r| (0..w).map(move |col| (r, col)));
            total += patch_ssim(xa, xb, idx.map(|(r, col)| (at(r, col), uniform)));
            continue;
        }
        let win = gaussian_window();
        let mut sum = 0.0;
        let mut count = 0usize;
        for r0 in 0..=h - WINDOW {
            for c0 in 0..=w - WINDOW {
                let idx = (0..WINDOW * WINDOW)
                    .map(|k| (at(r0 + k / WINDOW, c0 + k % WINDOW), win[k]));
                sum += patch_ssim(xa, xb, idx);
                count += 1;
            }
        }
        total += sum / count as f64;
    }
    Ok(total / c as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub l2: f64,
    pub linf: f64,
}

impl MetricReport {
    pub fn compare(reference: &Sample, other: &Sample) -> Result<Self> {
        let diff = other.sub(reference)?;
        Ok(Self {
            psnr_db: psnr(reference, other)?,
            ssim: ssim(reference, other)?,
            l2: diff.norm_l2(),
            linf: diff.norm_linf(),
        })
    }
}

/// Fraction of successful attacks, and the clean error rate of the same
/// inputs for the no-estimation baseline.
pub fn attack_success_rate(
    results: &[AttackResult],
    clean_preds: &[usize],
    labels: &[usize],
) -> Result<(f64, f64)> {
    if results.is_empty() {
        return Err(Error::EmptyInput("attack results"));
    }
    if results.len() != clean_preds.len() || results.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} results, {} clean predictions, {} labels",
            results.len(),
            clean_preds.len(),
            labels.len()
        )));
    }
    let n = results.len() as f64;
    let asr = results.iter().filter(|r| r.success).count() as f64 / n;
    let clean_error = clean_preds
        .iter()
        .zip(labels)
        .filter(|(p, y)| p != y)
        .count() as f64
        / n;
    Ok((asr, clean_error))
}

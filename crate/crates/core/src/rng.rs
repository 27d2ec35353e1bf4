//! Seeded generators with independent substreams.
//!
//! Every random draw in the crate goes through [`substream`], keyed by a base
//! seed plus a path of indices (step, iteration, query, ...). Draws are then
//! independent of execution order, so parallel evaluation never changes
//! results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sample::{Sample, Shape};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and an index path.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &i| mix(acc ^ mix(i)))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the substream at `path` under `seed`.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

pub fn standard_normal(rng: &mut ChaCha8Rng, shape: Shape) -> Sample {
    let data = (0..shape.len())
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Sample::from_parts(shape, data)
}

/// Uniform direction on the sphere of radius `sqrt(d)`, so that
/// `E[u u^T] = I`.
pub fn isotropic_direction(rng: &mut ChaCha8Rng, shape: Shape) -> Sample {
    loop {
        let g = standard_normal(rng, shape);
        let norm = g.norm_l2();
        if norm > 0.0 {
            return g.scale((shape.len() as f64).sqrt() / norm);
        }
    }
}

//! Seeded sampling helpers shared by the randomized checks.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used by every sampling-based check unless overridden.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "WULFF_SEED";

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed from `WULFF_SEED` (decimal or `0x` hex), falling back to the default.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| parse_seed(&s))
        .unwrap_or(DEFAULT_SEED)
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// Uniformly distributed point on the Euclidean unit sphere in `dim` dimensions.
pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Vector with independent coordinates uniform in `[-scale, scale]`.
pub fn box_vector(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-scale..scale))
        .collect()
}

/// Standard normal deviate (Box-Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

//! Counter-based randomness.
//!
//! Every random quantity in the crate is a pure function of a key tuple, so
//! results never depend on evaluation order or thread scheduling. Noise
//! values are addressed by `(seed, linear index, component)`; line draws and
//! Monte Carlo trials get their own [`ChaCha8Rng`] stream from
//! [`stream_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes an ordered key tuple into a 64-bit value.
#[inline]
pub fn hash_key(parts: &[u64]) -> u64 {
    let mut h = GOLDEN;
    for &p in parts {
        h = mix64(h ^ p.wrapping_add(GOLDEN).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    h
}

/// Uniform in the open interval (0, 1), 53 bits of resolution.
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// A pair of independent standard normals for the given key (Box–Muller).
#[inline]
pub fn normal_pair(seed: u64, index: u64) -> (f64, f64) {
    let u1 = unit_open(hash_key(&[seed, index, 0]));
    let u2 = unit_open(hash_key(&[seed, index, 1]));
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Seed for an independent stream, e.g. `stream_seed(&[seed, trial, iteration, sub])`.
pub fn stream_seed(parts: &[u64]) -> u64 {
    hash_key(parts)
}

/// A ChaCha8 stream keyed on the given tuple.
pub fn stream(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(parts))
}

//! Seeded sampling stream.
//!
//! The generator is SplitMix64 with the state initialized to the seed:
//! `state += 0x9E3779B97F4A7C15; z = state;
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//! out = z ^ (z >> 31)` (wrapping arithmetic). Uniform doubles in `[0, 1)` are
//! `(out >> 11) · 2^-53`. Any implementation of these two lines reproduces
//! the witness samples bit for bit.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct SampleStream {
    inner: SplitMix64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

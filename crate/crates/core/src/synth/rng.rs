//! Seeded random source for synthetic scenes.
//!
//! ChaCha8 (via `rand_chacha`) seeded with `seed_from_u64`. Uniforms take the top
//! 53 bits of `next_u64`; normals use the cosine branch of Box–Muller, one
//! normal per two uniforms. Only these primitives are used, so regeneration
//! does not depend on sampling algorithms inside `rand`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SynthRng(ChaCha8Rng);

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range(&mut self, lo: u32, hi: u32) -> u32 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + ((self.uniform() * span as f64) as u64).min(span - 1) as u32
    }

    /// Standard normal.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

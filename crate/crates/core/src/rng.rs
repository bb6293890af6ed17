//! Deterministic seeded random streams.
//!
//! Monte-Carlo drops must be reproducible and order-independent, so every
//! consumer gets its own counter-addressed stream: identical
//! (seed, stream index) pairs always replay the same draws, and distinct
//! stream indices never overlap regardless of how many values each consumer
//! pulls.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub struct SeededStream {
    rng: ChaCha8Rng,
}

/// Open stream `stream_index` of the generator family keyed by `master_seed`.
pub fn seeded_stream(master_seed: u64, stream_index: u64) -> SeededStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_index);
    SeededStream { rng }
}

impl SeededStream {
    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard circularly-symmetric complex Gaussian CN(0, 1):
    /// real and imaginary parts each N(0, 1/2).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        // Box-Muller in polar form; E|z|^2 = E[-ln u] = 1.
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let radius = (-u1.ln()).sqrt();
        let angle = 2.0 * PI * self.uniform();
        Complex64::from_polar(radius, angle)
    }
}

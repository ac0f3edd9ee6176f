//! Seedable randomness with a pinned algorithm so runs are bit-reproducible.
//!
//! All random draws in the crate flow through [`SeededRng`]: ChaCha8 keyed by
//! a 64-bit seed, uniform doubles from the top 53 bits, Gaussians via
//! Box-Muller. The algorithm identifier is recorded in experiment outputs.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier of the generator pipeline, recorded alongside every result.
pub const RNG_ALGORITHM: &str = "chacha8/u53-uniform/box-muller";

/// A ChaCha8 stream keyed by (seed, stream).
///
/// Independent streams of the same seed (restarts, shot noise) use distinct
/// stream numbers rather than perturbed seeds, so they never collide with
/// the per-trial `seed ^ trial` derivation used by the harness.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform angle in [0, 2*pi).
    pub fn uniform_angle(&mut self) -> f64 {
        self.uniform() * std::f64::consts::TAU
    }

    /// Pair of independent standard normals (Box-Muller).
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps ln finite
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        (r * phi.cos(), r * phi.sin())
    }

    /// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let (re, im) = self.gaussian_pair();
        Complex64::new(re, im)
    }

    /// Exp(1) variate.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Fraction of successes among `shots` Bernoulli(p) draws.
    pub fn binomial_fraction(&mut self, shots: u64, p: f64) -> f64 {
        let mut successes = 0u64;
        for _ in 0..shots {
            if self.bernoulli(p) {
                successes += 1;
            }
        }
        successes as f64 / shots as f64
    }
}

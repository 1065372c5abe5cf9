//! Deterministic random number generation for simulation runs.
//!
//! A ChaCha8 stream cipher drives a Marsaglia-polar Gaussian sampler. Both
//! pieces are platform-independent and version-stable, so a (seed, config)
//! pair reproduces a trace bit-for-bit anywhere.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Gaussian sampler over a seeded ChaCha8 stream.
pub struct GaussianRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform sample in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal sample (Marsaglia polar method; the second sample of
    /// each accepted pair is cached).
    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = crate::math::sqrt(-2.0 * crate::math::ln(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Derives an independent stream seed from a master seed (SplitMix64 on the
/// master xored with the stream index). Used to give thermal noise,
/// measurement noise, and initial conditions their own substreams, and to
/// assign per-point seeds inside experiment sweeps.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

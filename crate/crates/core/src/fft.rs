//! In-place radix-2 complex FFT.
//!
//! Power-of-two sizes only; the Welch estimator enforces that upstream. The
//! plan precomputes the bit-reversal permutation and twiddle table so it can
//! be reused across segments.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;

pub(crate) struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    bit_rev: Vec<u32>,
}

impl FftPlan {
    /// `n` must be a power of two and at least 2.
    pub(crate) fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two() && n >= 2);
        let mut twiddles = Vec::with_capacity(n / 2);
        let step = -2.0 * core::f64::consts::PI / n as f64;
        for k in 0..n / 2 {
            let phi = step * k as f64;
            twiddles.push(Complex64::new(math::cos(phi), math::sin(phi)));
        }
        let bits = n.trailing_zeros();
        let bit_rev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        Self {
            n,
            twiddles,
            bit_rev,
        }
    }

    /// Forward DFT, X[k] = Σ x[j]·exp(−2πi jk/n), in place.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (i, &j) in self.bit_rev.iter().enumerate() {
            let j = j as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let stride = self.n / len;
            let half = len / 2;
            for start in (0..self.n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

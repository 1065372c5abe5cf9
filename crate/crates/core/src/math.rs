//! Float math shims.
//!
//! Everything routes through `libm` rather than the `std` intrinsics so the
//! crate builds without `std` and produces identical bits whether compiled
//! for tests (std present) or embedded in a `no_std` consumer.

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline(always)]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline(always)]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[cfg_attr(not(test), allow(dead_code))]
#[inline(always)]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline(always)]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// 20·log10(|r|), the amplitude-ratio decibel scale.
#[inline]
pub fn amplitude_db(ratio: f64) -> f64 {
    20.0 * log10(ratio)
}

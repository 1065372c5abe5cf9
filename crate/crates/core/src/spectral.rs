//! Spectral analysis: Welch power spectral densities, Lorentzian line fits,
//! integrated-PSD mode thermometry, and lock-in extraction of coherently
//! driven responses.
//!
//! PSDs are one-sided throughout: integrating a spectrum over its frequency
//! grid returns the time-domain variance (Parseval), which the tests assert
//! for every window option.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constants::BOLTZMANN;
use crate::dynamics::{MechanicalMode, Trace};
use crate::error::{CoreError, Result};
use crate::fft::FftPlan;
use crate::levmar;
use crate::math;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Spectral window applied per Welch segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            // Periodic (DFT-even) Hann.
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - math::cos(TWO_PI * i as f64 / n as f64)))
                .collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }

    /// Equivalent noise bandwidth in bins.
    fn enbw_bins(self) -> f64 {
        match self {
            Window::Hann => 1.5,
            Window::Rectangular => 1.0,
        }
    }
}

/// One-sided power spectral density with averaging metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Frequency grid, Hz, strictly increasing from DC to Nyquist.
    pub frequencies: Vec<f64>,
    /// PSD values, (signal unit)²/Hz.
    pub psd: Vec<f64>,
    /// Number of averaged segments.
    pub n_averages: usize,
    pub window: Window,
    /// Resolution bandwidth (window ENBW × bin spacing), Hz.
    pub resolution_bandwidth: f64,
}

impl Spectrum {
    /// Bin spacing, Hz.
    pub fn bin_width(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    /// ∫ PSD df over the whole grid (trapezoid-free: uniform bins).
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width()
    }
}

/// Welch PSD of an arbitrary sample series.
///
/// `segment_length` must be a power of two (radix-2 FFT) no longer than the
/// series; `overlap_fraction` ∈ [0, 1). Trailing samples that do not fill a
/// final segment are discarded. Normalized so that white noise of variance
/// σ² integrates back to σ².
pub fn welch_psd_series(
    samples: &[f64],
    sample_rate: f64,
    segment_length: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<Spectrum> {
    if segment_length > samples.len() {
        return Err(CoreError::Argument("segment longer than the trace"));
    }
    if segment_length < 8 || !segment_length.is_power_of_two() {
        return Err(CoreError::Argument(
            "segment_length must be a power of two (>= 8)",
        ));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(CoreError::Argument("overlap_fraction must lie in [0, 1)"));
    }
    if !(sample_rate > 0.0) {
        return Err(CoreError::Argument("sample_rate must be positive"));
    }

    let n = segment_length;
    let hop = (n - (n as f64 * overlap_fraction) as usize).max(1);
    let coeffs = window.coefficients(n);
    let window_power: f64 = coeffs.iter().map(|w| w * w).sum();

    let plan = FftPlan::new(n);
    let n_bins = n / 2 + 1;
    let mut acc = vec![0.0f64; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut n_segments = 0usize;
    let mut start = 0usize;
    while start + n <= samples.len() {
        for (b, (&s, &w)) in buf.iter_mut().zip(samples[start..start + n].iter().zip(&coeffs)) {
            *b = Complex64::new(s * w, 0.0);
        }
        plan.forward(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        n_segments += 1;
        start += hop;
    }
    debug_assert!(n_segments >= 1);

    let scale = 1.0 / (n_segments as f64 * sample_rate * window_power);
    let psd: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            one_sided * a * scale
        })
        .collect();
    let df = sample_rate / n as f64;
    let frequencies = (0..n_bins).map(|k| k as f64 * df).collect();

    Ok(Spectrum {
        frequencies,
        psd,
        n_averages: n_segments,
        window,
        resolution_bandwidth: window.enbw_bins() * df,
    })
}

/// Welch PSD of the true displacement of a trace (Hann window).
pub fn welch_psd(trace: &Trace, segment_length: usize, overlap_fraction: f64) -> Result<Spectrum> {
    welch_psd_series(
        &trace.x,
        trace.sample_rate,
        segment_length,
        overlap_fraction,
        Window::Hann,
    )
}

/// Largest power-of-two segment usable for a series of `len` samples,
/// capped at 2²⁰ bins.
pub fn largest_segment(len: usize) -> usize {
    let max = 1usize << 20;
    if len >= max {
        max
    } else {
        (len + 1).next_power_of_two() / 2
    }
}

/// Averages spectra taken on identical grids (e.g. repeated runs with
/// different seeds), weighting by each spectrum's segment count.
pub fn average_spectra(spectra: &[Spectrum]) -> Result<Spectrum> {
    let first = spectra.first().ok_or(CoreError::Argument("no spectra to average"))?;
    let mut psd = vec![0.0; first.psd.len()];
    let mut total = 0usize;
    for s in spectra {
        if s.frequencies.len() != first.frequencies.len()
            || s.window != first.window
            || (s.bin_width() - first.bin_width()).abs() > 1e-9 * first.bin_width()
        {
            return Err(CoreError::Argument("spectra grids do not match"));
        }
        let w = s.n_averages as f64;
        for (p, v) in psd.iter_mut().zip(&s.psd) {
            *p += w * v;
        }
        total += s.n_averages;
    }
    let inv = 1.0 / total as f64;
    for p in psd.iter_mut() {
        *p *= inv;
    }
    Ok(Spectrum {
        frequencies: first.frequencies.clone(),
        psd,
        n_averages: total,
        window: first.window,
        resolution_bandwidth: first.resolution_bandwidth,
    })
}

/// Lorentzian line fit on a flat background, area-parameterized:
/// `S(f) = bg + (2A/πw) / (1 + 4(f−f₀)²/w²)` with full-line area A.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFit {
    /// Line center, Hz.
    pub center: f64,
    /// Full width at half maximum, Hz.
    pub fwhm: f64,
    /// Background-subtracted line area (= displacement variance), m².
    pub area: f64,
    /// Flat background level, m²/Hz.
    pub background: f64,
    /// Covariance of (center, ln fwhm, ln area, background), row-major 4×4.
    pub covariance: [[f64; 4]; 4],
}

/// Fits a Lorentzian plus flat background to the part of a spectrum between
/// `f_lo` and `f_hi`. Width and area are fit in log-space, which keeps them
/// positive; the area measures the full line, not just the windowed part.
pub fn fit_lorentzian(spectrum: &Spectrum, f_lo: f64, f_hi: f64) -> Result<LorentzianFit> {
    let lo = spectrum.frequencies.partition_point(|&f| f < f_lo);
    let hi = spectrum.frequencies.partition_point(|&f| f <= f_hi);
    if hi.saturating_sub(lo) < 16 {
        return Err(CoreError::Argument("fit window contains fewer than 16 bins"));
    }
    let freqs = &spectrum.frequencies[lo..hi];
    let data = &spectrum.psd[lo..hi];
    let n = data.len();

    // Initial guesses: median background, peak position, half-max width.
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let bg0 = sorted[n / 2];
    let (k_peak, &peak) = data
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let height = (peak - bg0).max(f64::MIN_POSITIVE);
    let df = spectrum.bin_width();
    let above = data.iter().filter(|&&v| v > bg0 + 0.5 * height).count();
    let w0 = (above.max(2) as f64 * df).max(spectrum.resolution_bandwidth);
    let a0 = (height * w0 * core::f64::consts::PI / 2.0).max(f64::MIN_POSITIVE);
    let p0 = [freqs[k_peak], math::ln(w0), math::ln(a0), bg0];

    let eval = |p: &[f64], r: &mut [f64], mut jac: Option<&mut [f64]>| {
        let (f0, w, a, bg) = (p[0], math::exp(p[1]), math::exp(p[2]), p[3]);
        let amp = 2.0 * a / (core::f64::consts::PI * w);
        for (i, (&f, &y)) in freqs.iter().zip(data).enumerate() {
            let z = 2.0 * (f - f0) / w;
            let u = 1.0 / (1.0 + z * z);
            let line = amp * u;
            r[i] = bg + line - y;
            if let Some(j) = jac.as_deref_mut() {
                j[i * 4] = amp * u * u * 4.0 * z / w; // ∂/∂f0
                j[i * 4 + 1] = amp * (2.0 * z * z * u * u - u); // ∂/∂ln w
                j[i * 4 + 2] = line; // ∂/∂ln A
                j[i * 4 + 3] = 1.0; // ∂/∂bg
            }
        }
    };

    let result = levmar::fit(eval, &p0, n, 200)?;
    let fwhm = math::exp(result.params[1]);
    let area = math::exp(result.params[2]);
    if !fwhm.is_finite() || !area.is_finite() || !result.params[0].is_finite() {
        return Err(CoreError::Estimation {
            reason: "Lorentzian fit diverged",
            iterations: result.iterations,
            cost: result.cost,
        });
    }
    let mut covariance = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            covariance[i][j] = result.covariance[i * 4 + j];
        }
    }
    Ok(LorentzianFit {
        center: result.params[0],
        fwhm,
        area,
        background: result.params[3],
        covariance,
    })
}

/// Mode temperature via the integrated (background-subtracted) PSD:
/// `T = m Ω² ⟨x²⟩ / k_B` with ⟨x²⟩ the fitted Lorentzian area.
///
/// The spectrum must cover the resonance with at least ±5 linewidths of
/// span. An identically zero spectrum reads 0 K.
pub fn mode_temperature_from_spectrum(spectrum: &Spectrum, mode: &MechanicalMode) -> Result<f64> {
    let f_m = mode.omega_m / TWO_PI;
    let half_span = 5.0 * mode.gamma_m / TWO_PI;
    let f_max = *spectrum.frequencies.last().unwrap_or(&0.0);
    if spectrum.frequencies[0] > f_m - half_span || f_max < f_m + half_span {
        return Err(CoreError::Argument(
            "spectrum does not cover the mode resonance with >= 10 linewidths of span",
        ));
    }
    if spectrum.psd.iter().all(|&p| p == 0.0) {
        return Ok(0.0);
    }
    // Generous window: wide enough for strongly broadened (feedback-damped)
    // lines yet leaving plenty of off-resonant background bins.
    let window = (300.0 * mode.gamma_m / TWO_PI).max(200.0 * spectrum.resolution_bandwidth);
    let f_lo = (f_m - window).max(spectrum.frequencies[0]);
    let f_hi = (f_m + window).min(f_max);
    let fit = fit_lorentzian(spectrum, f_lo, f_hi)?;
    Ok(mode.mass_eff * mode.omega_m * mode.omega_m * fit.area / BOLTZMANN)
}

/// Lock-in reading of a coherently driven trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenResponse {
    /// Displacement amplitude at the drive frequency, m.
    pub amplitude: f64,
    /// Phase relative to cos(ωt) with t = 0 at the first sample, rad.
    pub phase: f64,
    /// Applied modal force amplitude obtained by inverting the oscillator
    /// susceptibility at the drive frequency, N.
    pub force_equivalent: f64,
    /// Complex response X with x(t) = Re[X·exp(iωt)], m.
    pub response: Complex64,
}

/// Single-bin coherent demodulation of the *measured* displacement at the
/// drive frequency. Requires at least 100 drive periods and a drive below
/// Nyquist; demodulates over a whole number of periods to suppress the 2ω
/// leakage term.
pub fn driven_response(
    trace: &Trace,
    drive_frequency_hz: f64,
    mode: &MechanicalMode,
) -> Result<DrivenResponse> {
    let fs = trace.sample_rate;
    if !(drive_frequency_hz > 0.0) || drive_frequency_hz >= fs / 2.0 {
        return Err(CoreError::Argument("drive frequency must lie below Nyquist"));
    }
    let samples_per_period = fs / drive_frequency_hz;
    let periods = (trace.len() as f64 / samples_per_period) as usize;
    if periods < 100 {
        return Err(CoreError::Argument("trace shorter than 100 drive periods"));
    }
    let n_use = (periods as f64 * samples_per_period) as usize;
    let omega = TWO_PI * drive_frequency_hz;
    let (mut i_acc, mut q_acc) = (0.0, 0.0);
    for (k, &y) in trace.x_measured[..n_use].iter().enumerate() {
        let phase = omega * k as f64 / fs;
        i_acc += y * math::cos(phase);
        q_acc += y * math::sin(phase);
    }
    let response = Complex64::new(i_acc, -q_acc) * (2.0 / n_use as f64);
    let amplitude = response.norm();
    let phase = response.arg();
    let inv_chi = (mode.susceptibility(omega)).norm().recip();
    Ok(DrivenResponse {
        amplitude,
        phase,
        force_equivalent: amplitude * inv_chi,
        response,
    })
}

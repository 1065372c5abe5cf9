//! Time-domain stochastic simulation of one mechanical mode.
//!
//! The mode obeys `m ẍ + m Γ ẋ + m Ω² x = F_th(t) + F_drive(t) + F_fb(t)`
//! with `F_th` white Gaussian thermal force noise (one-sided PSD
//! `4 k_B T m Γ`), `F_drive` the modulated optical force, and `F_fb` an
//! optional feedback force.
//!
//! The integrator propagates the linear stochastic system *exactly* over
//! each step: position and velocity advance with the matrix exponential of
//! the drift, the deterministic force uses the exact step response (sampled
//! at the step midpoint), and the noise increment is drawn from the exact
//! two-dimensional step covariance. There is no Euler–Maruyama step-size
//! bias; the step size only needs to resolve the drive and feedback
//! waveforms.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constants::{BOLTZMANN, REDUCED_PLANCK, SPEED_OF_LIGHT};
use crate::error::{CoreError, Result};
use crate::feedback::FeedbackController;
use crate::forcing::{self, ForceBreakdown};
use crate::math;
use crate::rng::{derive_seed, GaussianRng};
use crate::thermal::FilmState;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Mechanical oscillator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalMode {
    /// Angular resonance frequency Ω_m, rad/s.
    pub omega_m: f64,
    /// Angular damping rate Γ_m, rad/s.
    pub gamma_m: f64,
    /// Effective mass, kg.
    pub mass_eff: f64,
    /// Single-photon optomechanical coupling rate, rad/s. Used only by
    /// measurement-calibration helpers, not by the equations of motion.
    pub g0: f64,
    /// Modal overlap of the radial force profile with this mode.
    pub overlap: f64,
}

impl MechanicalMode {
    pub fn new(omega_m: f64, gamma_m: f64, mass_eff: f64, g0: f64, overlap: f64) -> Result<Self> {
        if !(omega_m > 0.0) {
            return Err(CoreError::Config("omega_m must be positive"));
        }
        if !(gamma_m > 0.0 && gamma_m < omega_m) {
            return Err(CoreError::Config("mode must be underdamped (0 < gamma_m < omega_m)"));
        }
        if !(mass_eff > 0.0) {
            return Err(CoreError::Config("mass_eff must be positive"));
        }
        if !(g0 >= 0.0) {
            return Err(CoreError::Config("g0 must be non-negative"));
        }
        Ok(Self {
            omega_m,
            gamma_m,
            mass_eff,
            g0,
            overlap,
        })
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Mechanical susceptibility χ(ω) = 1 / (m (Ω² − ω² + iΓω)), m/N.
    pub fn susceptibility(&self, omega: f64) -> Complex64 {
        let den = Complex64::new(
            self.omega_m * self.omega_m - omega * omega,
            self.gamma_m * omega,
        );
        Complex64::new(1.0, 0.0) / (self.mass_eff * den)
    }

    /// Equipartition displacement variance `k_B T / (m Ω²)`, m².
    pub fn equipartition_variance(&self, t_bath: f64) -> f64 {
        BOLTZMANN * t_bath / (self.mass_eff * self.omega_m * self.omega_m)
    }

    /// Candidate effective mass derived from the measured optomechanical
    /// coupling under the *assumption* that the mode couples through radial
    /// cavity-length change: g0 = (ω_cav / R) · x_zpf with
    /// x_zpf = sqrt(ħ / 2 m Ω). This is a calibration note, not measured
    /// data; the flexural mode couples weakly, so the value comes out large.
    pub fn mass_from_radial_coupling(g0: f64, wavelength: f64, major_radius: f64, omega_m: f64) -> f64 {
        let omega_cav = TWO_PI * SPEED_OF_LIGHT / wavelength;
        let x_zpf = g0 * major_radius / omega_cav;
        REDUCED_PLANCK / (2.0 * x_zpf * x_zpf * omega_m)
    }
}

impl Default for MechanicalMode {
    /// First-order flexural mode defaults: Ω/2π = 1.35 MHz, Γ/2π = 530 Hz,
    /// g0/2π = 12.3 Hz, overlap 0.037%. The effective mass (20 ng) is a
    /// geometric estimate for a silica microtoroid and is a required
    /// configuration input; see [`MechanicalMode::mass_from_radial_coupling`]
    /// for an alternative coupling-based estimate.
    fn default() -> Self {
        Self {
            omega_m: TWO_PI * 1.35e6,
            gamma_m: TWO_PI * 530.0,
            mass_eff: 2.0e-11,
            g0: TWO_PI * 12.3,
            overlap: 3.7e-4,
        }
    }
}

/// One-sided thermal force noise PSD `S_FF = 4 k_B T m Γ`, N²/Hz.
pub fn thermal_force_psd(t_bath: f64, mode: &MechanicalMode) -> Result<f64> {
    if !(t_bath >= 0.0) {
        return Err(CoreError::Domain("bath temperature must be >= 0 K"));
    }
    Ok(4.0 * BOLTZMANN * t_bath * mode.mass_eff * mode.gamma_m)
}

/// Coherent drive applied through the optical forces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// Drive angular frequency, rad/s.
    pub frequency: f64,
    /// Power-modulation depth ε ∈ [0, 1]; the modal force amplitude is
    /// ε · (η F_rp + G_sf(ω) η F_sf).
    pub depth: f64,
    /// Cutoff of the superfluid forcing response applied to the superfluid
    /// term only, rad/s.
    pub superfluid_cutoff: f64,
}

impl Drive {
    pub fn at_mode(mode: &MechanicalMode, depth: f64) -> Self {
        Self {
            frequency: mode.omega_m,
            depth,
            superfluid_cutoff: forcing::DEFAULT_SUPERFLUID_CUTOFF,
        }
    }
}

/// How the state is prepared at t = 0 (before the settle interval).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    /// x = v = 0.
    #[default]
    Rest,
    /// Draw (x, v) from the open-loop thermal equilibrium distribution.
    ThermalEquilibrium,
}

/// Simulation run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Internal integrator step, s. Must satisfy `dt·Ω < 0.1`.
    pub dt: f64,
    /// Recorded span, s. Thermometry runs need ≥ 100/Γ to converge.
    pub duration: f64,
    /// Un-recorded lead-in, s (filters settle, transients decay).
    pub settle: f64,
    pub seed: u64,
    /// Bath temperature, K.
    pub t_bath: f64,
    pub drive: Option<Drive>,
    /// One-sided displacement imprecision PSD of the measurement, m²/Hz.
    pub measurement_noise_psd: f64,
    /// Internal steps per recorded sample. The recorded rate must stay at or
    /// above 16 samples per mechanical period.
    pub output_decimation: usize,
    /// Record the applied (drive + feedback) modal force alongside x.
    pub record_force: bool,
    pub initial: InitialState,
}

impl SimulationConfig {
    /// Standard resolution for a mode: 64 integrator steps per period
    /// (dt·Ω = 2π/64 ≈ 0.098), decimated to 16 recorded samples per period.
    pub fn for_mode(mode: &MechanicalMode, t_bath: f64, duration: f64, seed: u64) -> Self {
        let period = TWO_PI / mode.omega_m;
        Self {
            dt: period / 64.0,
            duration,
            settle: 0.0,
            seed,
            t_bath,
            drive: None,
            measurement_noise_psd: 0.0,
            output_decimation: 4,
            record_force: false,
            initial: InitialState::Rest,
        }
    }

    /// Configuration for thermometry: equilibrium start, duration given in
    /// mechanical relaxation times (1/Γ).
    pub fn thermometry(mode: &MechanicalMode, t_bath: f64, relaxation_times: f64, seed: u64) -> Self {
        let mut cfg = Self::for_mode(mode, t_bath, relaxation_times / mode.gamma_m, seed);
        cfg.initial = InitialState::ThermalEquilibrium;
        cfg
    }

    /// Recorded sample rate, Hz.
    pub fn sample_rate(&self) -> f64 {
        1.0 / (self.dt * self.output_decimation as f64)
    }

    fn validate(&self, mode: &MechanicalMode) -> Result<()> {
        if !(mode.omega_m > 0.0 && mode.gamma_m > 0.0 && mode.gamma_m < mode.omega_m) {
            return Err(CoreError::Config("mode must be underdamped (0 < gamma_m < omega_m)"));
        }
        if !(mode.mass_eff > 0.0) {
            return Err(CoreError::Config("mass_eff must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(CoreError::Config("dt must be positive"));
        }
        if self.dt * mode.omega_m >= 0.1 {
            return Err(CoreError::Config("resolution guard violated: dt * omega_m must be < 0.1"));
        }
        if self.output_decimation == 0 {
            return Err(CoreError::Config("output_decimation must be >= 1"));
        }
        // 16 recorded samples per period, with a little slack for rounding.
        if self.dt * self.output_decimation as f64 * mode.omega_m > TWO_PI / 16.0 * (1.0 + 1e-9) {
            return Err(CoreError::Config(
                "recorded rate must be at least 16 samples per mechanical period",
            ));
        }
        if !(self.duration > 0.0) {
            return Err(CoreError::Config("duration must be positive"));
        }
        if !(self.settle >= 0.0) {
            return Err(CoreError::Config("settle must be non-negative"));
        }
        if !(self.t_bath >= 0.0) {
            return Err(CoreError::Config("t_bath must be >= 0 K"));
        }
        if !(self.measurement_noise_psd >= 0.0) {
            return Err(CoreError::Config("measurement_noise_psd must be >= 0"));
        }
        if let Some(d) = &self.drive {
            if !(d.frequency > 0.0) || !(d.superfluid_cutoff > 0.0) {
                return Err(CoreError::Config("drive frequency and cutoff must be positive"));
            }
            if d.frequency * self.dt * self.output_decimation as f64 >= core::f64::consts::PI {
                return Err(CoreError::Config("drive frequency above recorded Nyquist"));
            }
            if !(0.0..=1.0).contains(&d.depth) {
                return Err(CoreError::Config("drive depth must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Recorded simulation output. All series share the (decimated) sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Recorded sample rate, Hz.
    pub sample_rate: f64,
    /// True displacement, m.
    pub x: Vec<f64>,
    /// Measured displacement x + n(t) with white imprecision noise, m.
    pub x_measured: Vec<f64>,
    /// Applied modal force (drive + feedback) at each sample, N.
    /// Recorded only when requested.
    pub force_applied: Option<Vec<f64>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.x.len() as f64 / self.sample_rate
    }

    /// Sample variance of the true displacement about its mean, m².
    pub fn displacement_variance(&self) -> f64 {
        variance(&self.x)
    }
}

pub(crate) fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Exact one-step propagator of the damped stochastic oscillator.
///
/// State z = (x, v) advances as `z' = M z + j·(F/m) + L ξ` with
/// M = exp(A dt) for the drift matrix A = [[0, 1], [−Ω², −Γ]],
/// j = A⁻¹(M − I)·(0, 1)ᵀ the exact zero-order-hold force response, and
/// L the Cholesky factor of the exact noise covariance
/// Σ(dt) = ∫₀^dt e^{As} B Bᵀ e^{Aᵀs} ds, B = (0, σ)ᵀ, σ² = 2 k_B T Γ / m.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExactPropagator {
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
    j12: f64,
    j22: f64,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl ExactPropagator {
    pub(crate) fn new(mode: &MechanicalMode, dt: f64, t_bath: f64) -> Self {
        let omega2 = mode.omega_m * mode.omega_m;
        let gamma = mode.gamma_m;
        let lam = 0.5 * gamma;
        let wd = math::sqrt(omega2 - lam * lam);

        let e1 = math::exp(-lam * dt);
        let (s, c) = (math::sin(wd * dt), math::cos(wd * dt));
        let m11 = e1 * (c + lam / wd * s);
        let m12 = e1 * s / wd;
        let m21 = -omega2 * m12;
        let m22 = e1 * (c - lam / wd * s);

        // A⁻¹ = [[−Γ/Ω², −1/Ω²], [1, 0]]; force enters in the velocity row.
        let j12 = -(gamma * m12 + m22 - 1.0) / omega2;
        let j22 = m12;

        // Exact step covariance (σ² factored out then restored):
        //   Σxx = σ²/(4λΩ²) · [−expm1(−2λt) − e^{−2λt}·axx]
        //   Σxv = σ² e^{−2λt} sin²(ω_d t) / (2 ω_d²)
        //   Σvv = σ²/(4λ) · [−expm1(−2λt) − e^{−2λt}·avv]
        // with axx/avv = (2λ² sin² ± λ ω_d sin 2ω_d t)/ω_d². The expm1 form
        // keeps precision at small λ·dt where the brackets nearly cancel.
        let q = 2.0 * BOLTZMANN * t_bath * gamma / mode.mass_eff;
        let (l11, l21, l22) = if q > 0.0 {
            let e2 = math::exp(-2.0 * lam * dt);
            let em = -math::expm1(-2.0 * lam * dt);
            let s2 = math::sin(2.0 * wd * dt);
            let axx = (2.0 * lam * lam * s * s + lam * wd * s2) / (wd * wd);
            let avv = (2.0 * lam * lam * s * s - lam * wd * s2) / (wd * wd);
            let sxx = q / (4.0 * lam * omega2) * (em - e2 * axx);
            let sxv = q * e2 * s * s / (2.0 * wd * wd);
            let svv = q / (4.0 * lam) * (em - e2 * avv);
            let l11 = math::sqrt(sxx);
            let l21 = sxv / l11;
            let l22 = math::sqrt((svv - l21 * l21).max(0.0));
            (l11, l21, l22)
        } else {
            (0.0, 0.0, 0.0)
        };

        Self {
            m11,
            m12,
            m21,
            m22,
            j12,
            j22,
            l11,
            l21,
            l22,
        }
    }

    /// Advances (x, v) one step under acceleration `accel` (force/mass,
    /// held over the step) and unit Gaussians (z1, z2).
    #[inline(always)]
    pub(crate) fn step(&self, x: &mut f64, v: &mut f64, accel: f64, z1: f64, z2: f64) {
        let xn = self.m11 * *x + self.m12 * *v + self.j12 * accel + self.l11 * z1;
        let vn = self.m21 * *x + self.m22 * *v + self.j22 * accel + self.l21 * z1 + self.l22 * z2;
        *x = xn;
        *v = vn;
    }

    #[cfg(test)]
    pub(crate) fn transfer(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    #[cfg(test)]
    pub(crate) fn noise_covariance(&self) -> [[f64; 2]; 2] {
        let sxx = self.l11 * self.l11;
        let sxv = self.l11 * self.l21;
        let svv = self.l21 * self.l21 + self.l22 * self.l22;
        [[sxx, sxv], [sxv, svv]]
    }
}

/// Integrates the mode under thermal noise, the modulated optical drive, and
/// optionally a cold-damping feedback loop.
///
/// The drive phasor is `ε · (η F_rp + G_sf(ω) η F_sf)` with the superfluid
/// term low-pass filtered and present only while the film is; forces are
/// evaluated at step midpoints. The feedback controller runs at the recorded
/// sample rate on the measured displacement, its force held between updates.
/// Deterministic for a given (config, seed): thermal noise, measurement
/// noise, and initial conditions use independent derived streams.
pub fn simulate(
    mode: &MechanicalMode,
    config: &SimulationConfig,
    forces: &ForceBreakdown,
    film: &FilmState,
    controller: Option<&FeedbackController>,
) -> Result<Trace> {
    config.validate(mode)?;

    let decim = config.output_decimation;
    let dt = config.dt;
    let fs_out = config.sample_rate();
    let n_out = math::round(config.duration * fs_out) as usize;
    let n_out = n_out.max(1);
    let n_settle = math::round(config.settle * fs_out) as usize;

    let propagator = ExactPropagator::new(mode, dt, config.t_bath);

    let mut thermal_rng = GaussianRng::new(derive_seed(config.seed, 0));
    let mut meas_rng = GaussianRng::new(derive_seed(config.seed, 1));
    let sigma_meas = math::sqrt(config.measurement_noise_psd * fs_out / 2.0);

    let (mut x, mut v) = match config.initial {
        InitialState::Rest => (0.0, 0.0),
        InitialState::ThermalEquilibrium => {
            let mut init_rng = GaussianRng::new(derive_seed(config.seed, 2));
            let sx = math::sqrt(mode.equipartition_variance(config.t_bath));
            let sv = math::sqrt(BOLTZMANN * config.t_bath / mode.mass_eff);
            (sx * init_rng.next_gaussian(), sv * init_rng.next_gaussian())
        }
    };

    // Complex drive amplitude at the drive frequency.
    let (drive_re, drive_im, omega_d) = match &config.drive {
        Some(d) => {
            let sf = if film.present {
                forcing::superfluid_response_gain(d.frequency, d.superfluid_cutoff)
                    * forces.superfluid_modal
            } else {
                Complex64::new(0.0, 0.0)
            };
            let amp = (Complex64::new(mode.overlap * forces.radiation, 0.0) + sf) * d.depth;
            (amp.re, amp.im, d.frequency)
        }
        None => (0.0, 0.0, 0.0),
    };
    let has_drive = config.drive.is_some();

    // Rotating phasor at internal-step midpoints, re-synced periodically to
    // bound accumulated rounding drift.
    let theta = omega_d * dt;
    let (rot_s, rot_c) = (math::sin(theta), math::cos(theta));
    let mut ph_c = math::cos(0.5 * theta);
    let mut ph_s = math::sin(0.5 * theta);
    const RESYNC: usize = 8192;

    let mut loop_filter = match controller {
        Some(c) => Some(c.instantiate(fs_out, mode)?),
        None => None,
    };
    let mut f_fb = 0.0;

    let inv_mass = 1.0 / mode.mass_eff;
    let mut xs = Vec::with_capacity(n_out);
    let mut ys = Vec::with_capacity(n_out);
    let mut fs = if config.record_force {
        Some(Vec::with_capacity(n_out))
    } else {
        None
    };

    let total_out = n_settle + n_out;
    let mut step_index: usize = 0;
    for j in 0..total_out {
        let y = x + sigma_meas * meas_rng.next_gaussian();
        if let Some(filter) = loop_filter.as_mut() {
            f_fb = filter.step(y);
        }
        if j >= n_settle {
            if !(x.is_finite() && v.is_finite()) {
                return Err(CoreError::IntegratorFault { step: j - n_settle });
            }
            xs.push(x);
            ys.push(y);
            if let Some(f) = fs.as_mut() {
                let t = step_index as f64 * dt;
                let f_drive = if has_drive {
                    drive_re * math::cos(omega_d * t) - drive_im * math::sin(omega_d * t)
                } else {
                    0.0
                };
                f.push(f_drive + f_fb);
            }
        }
        for _ in 0..decim {
            let f_drive = if has_drive {
                drive_re * ph_c - drive_im * ph_s
            } else {
                0.0
            };
            let accel = (f_drive + f_fb) * inv_mass;
            let z1 = thermal_rng.next_gaussian();
            let z2 = thermal_rng.next_gaussian();
            propagator.step(&mut x, &mut v, accel, z1, z2);

            step_index += 1;
            if has_drive {
                if step_index % RESYNC == 0 {
                    let t_mid = (step_index as f64 + 0.5) * dt;
                    ph_c = math::cos(omega_d * t_mid);
                    ph_s = math::sin(omega_d * t_mid);
                } else {
                    let c_new = ph_c * rot_c - ph_s * rot_s;
                    ph_s = ph_s * rot_c + ph_c * rot_s;
                    ph_c = c_new;
                }
            }
        }
    }

    Ok(Trace {
        sample_rate: fs_out,
        x: xs,
        x_measured: ys,
        force_applied: fs,
    })
}

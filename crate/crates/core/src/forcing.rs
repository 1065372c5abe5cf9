//! Optical forces on the resonator: radiation pressure, the superfluid
//! evaporative-recoil (photoconvective) force, their modal projections, and
//! the frequency response of the superfluid forcing channel.
//!
//! Sign convention: the superfluid force is radially inward and reported
//! positive; the generalized modal force inherits the sign of the overlap
//! factor, which may be configured negative for modes that move against it.

use num_complex::Complex64;

use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::MechanicalMode;
use crate::error::{CoreError, Result};
use crate::materials::{self, HeliumProperties};
use crate::math;
use crate::thermal::FilmState;

/// Half-space angular factor of isotropic evaporation, 4/π².
pub const HALF_SPACE_FACTOR: f64 = 4.0 / (core::f64::consts::PI * core::f64::consts::PI);

/// Default cutoff of the superfluid forcing response, rad/s (2π · 2 MHz).
pub const DEFAULT_SUPERFLUID_CUTOFF: f64 = 2.0 * core::f64::consts::PI * 2.0e6;

/// Optical cavity parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalCavity {
    /// Laser wavelength, m.
    pub wavelength: f64,
    /// Cavity linewidth κ, rad/s.
    pub linewidth: f64,
    /// Cavity finesse.
    pub finesse: f64,
    /// Fraction of injected power absorbed at the periphery. The force
    /// formulas below take absorbed power directly; this knob is for
    /// converting experiment-level injected powers.
    pub absorbed_fraction: f64,
}

impl OpticalCavity {
    pub fn new(wavelength: f64, linewidth: f64, finesse: f64, absorbed_fraction: f64) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(CoreError::Config("wavelength must be positive"));
        }
        if !(linewidth > 0.0) {
            return Err(CoreError::Config("linewidth must be positive"));
        }
        if !(finesse > 0.0) {
            return Err(CoreError::Config("finesse must be positive"));
        }
        if !(0.0..=1.0).contains(&absorbed_fraction) {
            return Err(CoreError::Config("absorbed_fraction must lie in [0, 1]"));
        }
        Ok(Self {
            wavelength,
            linewidth,
            finesse,
            absorbed_fraction,
        })
    }
}

impl Default for OpticalCavity {
    /// 1555.08 nm, κ/2π = 23.5 MHz, finesse 53,000, full absorption.
    fn default() -> Self {
        Self {
            wavelength: 1.55508e-6,
            linewidth: 2.0 * core::f64::consts::PI * 23.5e6,
            finesse: 53_000.0,
            absorbed_fraction: 1.0,
        }
    }
}

/// The forces acting at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceBreakdown {
    /// Radiation pressure force, N.
    pub radiation: f64,
    /// Radially integrated superfluid photoconvective force, N.
    /// Zero when no film is present.
    pub superfluid_total: f64,
    /// Superfluid force projected onto the mechanical mode, N.
    pub superfluid_modal: f64,
    /// Evaporation temperature used for the superfluid force, K.
    pub t_evap: f64,
}

impl ForceBreakdown {
    /// Evaluates all forces for an absorbed power, evaporation temperature,
    /// and film state.
    pub fn evaluate(
        p_abs: f64,
        t_evap: f64,
        cavity: &OpticalCavity,
        mode: &MechanicalMode,
        film: &FilmState,
        props: &HeliumProperties,
    ) -> Result<Self> {
        let radiation = radiation_pressure_force(p_abs, cavity)?;
        let superfluid_total = if film.present {
            photoconvective_force(p_abs, t_evap, props)?
        } else {
            0.0
        };
        Ok(Self {
            radiation,
            superfluid_total,
            superfluid_modal: modal_force(superfluid_total, mode),
            t_evap,
        })
    }

    /// No optical forces at all (pure thermal-noise simulations).
    pub fn zero() -> Self {
        Self {
            radiation: 0.0,
            superfluid_total: 0.0,
            superfluid_modal: 0.0,
            t_evap: 0.0,
        }
    }
}

/// Radiation pressure force of a fully recycled intracavity field,
/// F = P_abs · ℱ / c.
pub fn radiation_pressure_force(p_abs: f64, cavity: &OpticalCavity) -> Result<f64> {
    if !(p_abs >= 0.0) {
        return Err(CoreError::Domain("absorbed power must be >= 0 W"));
    }
    Ok(p_abs * cavity.finesse / SPEED_OF_LIGHT)
}

/// Radially integrated evaporative-recoil force,
/// F = (4/π²) · v_rms(T_evap) · ṁ(P_abs).
pub fn photoconvective_force(p_abs: f64, t_evap: f64, props: &HeliumProperties) -> Result<f64> {
    let v = materials::rms_evaporation_velocity(t_evap, props)?;
    let mdot = materials::steady_state_mass_flow(p_abs, props)?;
    Ok(HALF_SPACE_FACTOR * v * mdot)
}

/// Ratio of the photoconvective force to radiation pressure. Independent of
/// power (both are linear in P_abs).
pub fn force_ratio(t_evap: f64, cavity: &OpticalCavity, props: &HeliumProperties) -> Result<f64> {
    if !(t_evap > 0.0) {
        return Err(CoreError::Domain("evaporation temperature must be > 0 K"));
    }
    let p_ref = 1e-6;
    let f_sf = photoconvective_force(p_ref, t_evap, props)?;
    let f_rp = radiation_pressure_force(p_ref, cavity)?;
    Ok(f_sf / f_rp)
}

/// Projects a radially distributed force onto a mechanical mode via its
/// scalar overlap factor.
pub fn modal_force(f_total: f64, mode: &MechanicalMode) -> f64 {
    mode.overlap * f_total
}

/// Theoretical force band for an uncertain evaporation temperature: the
/// photoconvective force evaluated at the mode temperature and at
/// `t_mode + delta_max` (evaporated atoms may leave hotter than the film).
pub fn theory_band(
    p_abs: f64,
    t_mode: f64,
    delta_max: f64,
    props: &HeliumProperties,
) -> Result<(f64, f64)> {
    if !(delta_max >= 0.0) {
        return Err(CoreError::Domain("delta_max must be >= 0 K"));
    }
    let low = photoconvective_force(p_abs, t_mode, props)?;
    let high = photoconvective_force(p_abs, t_mode + delta_max, props)?;
    Ok((low, high))
}

/// Complex gain of the superfluid forcing channel at a drive frequency:
/// a single-pole low-pass 1/(1 + iω/ω_c). Radiation pressure is not
/// filtered. The first-order shape is a modeling choice; only the ~2 MHz
/// cutoff is observational.
pub fn superfluid_response_gain(drive_frequency: f64, cutoff: f64) -> Complex64 {
    debug_assert!(cutoff > 0.0);
    Complex64::new(1.0, 0.0) / Complex64::new(1.0, drive_frequency / cutoff)
}

/// Amplitude of the superfluid response in decibels relative to DC.
pub fn superfluid_response_db(drive_frequency: f64, cutoff: f64) -> f64 {
    math::amplitude_db(superfluid_response_gain(drive_frequency, cutoff).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MechanicalMode;
    use core::f64::consts::PI;

    fn cavity() -> OpticalCavity {
        OpticalCavity::default()
    }

    fn props() -> HeliumProperties {
        HeliumProperties::default()
    }

    #[test]
    fn radiation_pressure_zero_power() {
        assert_eq!(radiation_pressure_force(0.0, &cavity()).unwrap(), 0.0);
    }

    #[test]
    fn radiation_pressure_at_one_microwatt() {
        // 1e-6 × 53000 / c = 1.7679e-10 N.
        let f = radiation_pressure_force(1e-6, &cavity()).unwrap();
        assert!((f - 1.768e-10).abs() < 1e-13, "F_rp = {f}");
    }

    #[test]
    fn radiation_pressure_linear() {
        let f1 = radiation_pressure_force(1e-6, &cavity()).unwrap();
        let f2 = radiation_pressure_force(2e-6, &cavity()).unwrap();
        assert!((f2 - 2.0 * f1).abs() <= f1 * 1e-12);
    }

    #[test]
    fn photoconvective_at_one_microwatt_one_kelvin() {
        // (4/π²) · 78.9417 · (1e-6 / 2.4e4) = 1.3331e-9 N.
        let f = photoconvective_force(1e-6, 1.0, &props()).unwrap();
        assert!((f - 1.333e-9).abs() < 0.01 * 1.333e-9, "F_sf = {f}");
    }

    #[test]
    fn photoconvective_zero_temperature() {
        assert_eq!(photoconvective_force(1e-6, 0.0, &props()).unwrap(), 0.0);
    }

    #[test]
    fn photoconvective_matches_paper_scale_at_operating_point() {
        // At the default calibration the probe of the driven-response
        // experiment absorbs 0.47 × 2.1 μW; near the film transition the
        // total superfluid force lands at the measured 1.46 nN scale
        // (model-vs-data spread up to 60%).
        let p_abs = 0.47 * 2.1e-6;
        for t_evap in [0.85, 1.35, 1.85] {
            let f = photoconvective_force(p_abs, t_evap, &props()).unwrap();
            assert!(
                f >= 0.4 * 1.46e-9 && f <= 1.6 * 1.46e-9,
                "F_sf({t_evap} K) = {f}"
            );
        }
    }

    #[test]
    fn compositional_identity_against_materials() {
        let p = props();
        for (p_abs, t) in [(1e-7, 0.5), (2.3e-6, 1.2), (5e-6, 3.0)] {
            let direct = photoconvective_force(p_abs, t, &p).unwrap();
            let composed = HALF_SPACE_FACTOR
                * materials::rms_evaporation_velocity(t, &p).unwrap()
                * materials::steady_state_mass_flow(p_abs, &p).unwrap();
            assert_eq!(direct.to_bits(), composed.to_bits());
        }
    }

    #[test]
    fn force_ratio_at_one_kelvin() {
        let r = force_ratio(1.0, &cavity(), &props()).unwrap();
        assert!((r - 7.5).abs() < 1.5, "ratio = {r}");
        let scaled = r * cavity().finesse;
        assert!(
            (3e5..=5e5).contains(&scaled),
            "ratio × finesse = {scaled}"
        );
    }

    #[test]
    fn force_ratio_unity_near_finesse_400k() {
        let c = OpticalCavity {
            finesse: 400_000.0,
            ..OpticalCavity::default()
        };
        let r = force_ratio(1.0, &c, &props()).unwrap();
        assert!((0.7..=1.4).contains(&r), "ratio at F=400k: {r}");
    }

    #[test]
    fn force_ratio_independent_of_power() {
        // The ratio is defined through a reference power; verify the two
        // forces really scale identically so the choice cannot matter.
        let (c, p) = (cavity(), props());
        for p_abs in [1e-9, 1e-6, 1e-3] {
            let direct = photoconvective_force(p_abs, 1.0, &p).unwrap()
                / radiation_pressure_force(p_abs, &c).unwrap();
            let ratio = force_ratio(1.0, &c, &p).unwrap();
            assert!((direct - ratio).abs() <= ratio * 1e-12);
        }
    }

    #[test]
    fn response_step_db_near_transition() {
        // Below the transition the drive couples through F_rp + F_sf, above
        // through F_rp alone: the amplitude step is 20·log10(1 + ratio),
        // within ±3 dB of 21 dB for evaporation temperatures in the
        // transition band.
        let (c, p) = (cavity(), props());
        for t_evap in [0.85, 1.0, 1.35, 1.85] {
            let r = force_ratio(t_evap, &c, &p).unwrap();
            let step = math::amplitude_db(1.0 + r);
            assert!(
                (18.0..=24.0).contains(&step),
                "step at T_evap={t_evap}: {step} dB"
            );
        }
    }

    #[test]
    fn modal_force_examples() {
        let mode = MechanicalMode::default();
        // 1.46 nN through the 0.037% overlap gives 540 fN.
        let f = modal_force(1.46e-9, &mode);
        assert!((f - 540e-15).abs() < 2e-15, "modal force = {f}");

        let identity = MechanicalMode {
            overlap: 1.0,
            ..MechanicalMode::default()
        };
        assert_eq!(modal_force(0.123, &identity), 0.123);
        let zero = MechanicalMode {
            overlap: 0.0,
            ..MechanicalMode::default()
        };
        assert_eq!(modal_force(0.123, &zero), 0.0);
    }

    #[test]
    fn modal_force_linear_in_both() {
        let mode = MechanicalMode::default();
        let f = modal_force(2.0e-9, &mode);
        assert!((f - 2.0 * modal_force(1.0e-9, &mode)).abs() < 1e-24);
        let double_overlap = MechanicalMode {
            overlap: 2.0 * mode.overlap,
            ..mode
        };
        assert!((modal_force(1.0e-9, &double_overlap) - 2.0 * modal_force(1.0e-9, &mode)).abs() < 1e-24);
    }

    #[test]
    fn theory_band_degenerate_and_sqrt_scaling() {
        let p = props();
        let (lo, hi) = theory_band(1e-6, 0.85, 0.0, &p).unwrap();
        assert_eq!(lo, hi);

        let (lo, hi) = theory_band(1e-6, 0.85, 1.0, &p).unwrap();
        assert!(lo <= hi);
        let expected = math::sqrt(1.85 / 0.85);
        assert!((hi / lo - expected).abs() < 1e-9, "band ratio = {}", hi / lo);
    }

    #[test]
    fn theory_band_contains_measured_modal_force() {
        // 540 fN modal response near the transition with the driven-response
        // experiment defaults (2.1 μW injected, 0.47 absorbed).
        let mode = MechanicalMode::default();
        let (lo, hi) = theory_band(0.47 * 2.1e-6, 0.85, 1.0, &props()).unwrap();
        let (lo_m, hi_m) = (modal_force(lo, &mode), modal_force(hi, &mode));
        assert!(
            lo_m <= 540e-15 && 540e-15 <= hi_m,
            "modal band [{lo_m}, {hi_m}] should contain 540 fN"
        );
    }

    #[test]
    fn response_gain_dc_and_pole() {
        let wc = DEFAULT_SUPERFLUID_CUTOFF;
        assert!((superfluid_response_gain(0.0, wc).norm() - 1.0).abs() < 1e-15);
        let at_pole = superfluid_response_gain(wc, wc).norm();
        assert!((at_pole - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn response_gain_at_flexural_mode() {
        // |1/(1 + i·1.35/2)| = 0.829.
        let g = superfluid_response_gain(2.0 * PI * 1.35e6, 2.0 * PI * 2.0e6).norm();
        assert!((g - 0.829).abs() < 0.001, "gain = {g}");
    }

    #[test]
    fn force_breakdown_respects_film_state() {
        let mode = MechanicalMode::default();
        let film = FilmState {
            present: true,
            boiled_off: false,
        };
        let no_film = FilmState {
            present: false,
            boiled_off: false,
        };
        let with = ForceBreakdown::evaluate(1e-6, 1.0, &cavity(), &mode, &film, &props()).unwrap();
        let without =
            ForceBreakdown::evaluate(1e-6, 1.0, &cavity(), &mode, &no_film, &props()).unwrap();
        assert!(with.superfluid_total > 0.0);
        assert_eq!(without.superfluid_total, 0.0);
        assert_eq!(without.superfluid_modal, 0.0);
        assert_eq!(with.radiation, without.radiation);
        assert!(
            (with.superfluid_modal - mode.overlap * with.superfluid_total).abs()
                <= with.superfluid_modal * 1e-12
        );
    }
}

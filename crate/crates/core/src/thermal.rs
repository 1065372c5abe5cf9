//! Steady-state thermal model of the resonator.
//!
//! A single power-law heat balance `P = a·(T_mode^n − T_cryo^n)` links the
//! absorbed optical power to the mode temperature. The coefficient `a` is
//! pinned by one calibration anchor (a cryostat temperature, an absorbed
//! power, and the resulting mode temperature); the exponent shapes how the
//! plateau rolls off into the thermalized regime.
//!
//! The superfluid film is tracked by a small latched state machine: the film
//! forms below the transition temperature and boils off irreversibly (until
//! an explicit refill) once the absorbed power exceeds what Landau-limited
//! film flow can resupply.

use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::materials::{self, HeliumProperties};
use crate::math;

/// Calibration anchor of the heat-balance law: at cryostat temperature
/// `t_cryostat` and absorbed power `p_abs`, the mode sits at `t_mode`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationAnchor {
    pub t_cryostat: f64,
    pub p_abs: f64,
    pub t_mode: f64,
}

/// Heat-balance model `p_abs = a·(T_mode^n − T_cryo^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalModel {
    /// Conductance coefficient `a`, W/K^n.
    pub conductance_coefficient: f64,
    /// Heat-law exponent `n`.
    pub conductance_exponent: f64,
    /// The anchor used to pin the coefficient.
    pub calibration: CalibrationAnchor,
    /// Mode temperature after the film has boiled off, K. With the film gone
    /// the resonator is no longer anchored to the cryostat and sits at a
    /// laser-heating-dominated temperature.
    pub no_film_temperature: f64,
}

impl ThermalModel {
    /// Builds the model from its anchor: `a = p / (T_m^n − T_c^n)`.
    pub fn from_anchor(
        anchor: CalibrationAnchor,
        exponent: f64,
        no_film_temperature: f64,
    ) -> Result<Self> {
        if !(exponent >= 1.0) {
            return Err(CoreError::Config("conductance exponent must be >= 1"));
        }
        if !(anchor.t_cryostat > 0.0) || !(anchor.t_mode > anchor.t_cryostat) {
            return Err(CoreError::Config(
                "anchor must have 0 < t_cryostat < t_mode",
            ));
        }
        if !(anchor.p_abs > 0.0) {
            return Err(CoreError::Config("anchor power must be positive"));
        }
        if !(no_film_temperature > 0.0) {
            return Err(CoreError::Config("no_film_temperature must be positive"));
        }
        let span = math::powf(anchor.t_mode, exponent) - math::powf(anchor.t_cryostat, exponent);
        let coefficient = anchor.p_abs / span;
        if !(coefficient > 0.0) || !coefficient.is_finite() {
            return Err(CoreError::Config("anchor yields a non-physical conductance"));
        }
        Ok(Self {
            conductance_coefficient: coefficient,
            conductance_exponent: exponent,
            calibration: anchor,
            no_film_temperature,
        })
    }
}

impl Default for ThermalModel {
    /// Calibrated defaults: the anchor reproduces the observed plateau
    /// (0.32 K cryostat, 47 nW absorbed ≙ 100 nW injected at the default
    /// 0.47 absorption, 0.565 K mode temperature). The exponent 14 is a
    /// regression-calibrated value that also reproduces the low/high ends of
    /// the measured power sweep (0.51 K at 10 nW, 0.73 K at 2.1 μW injected);
    /// smaller, boundary-resistance-like exponents cannot reach both.
    fn default() -> Self {
        Self::from_anchor(
            CalibrationAnchor {
                t_cryostat: 0.32,
                p_abs: 0.47 * 1e-7,
                t_mode: 0.565,
            },
            14.0,
            3.0,
        )
        .expect("default anchor is valid")
    }
}

/// Presence of the superfluid film. `boiled_off` latches: once the film is
/// gone it only returns via [`FilmState::refill`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FilmState {
    pub present: bool,
    pub boiled_off: bool,
}

impl FilmState {
    /// A film present below the transition (the usual cold starting point).
    pub fn formed() -> Self {
        Self {
            present: true,
            boiled_off: false,
        }
    }

    /// Clears the boil-off latch (chamber refill / thermal cycle).
    pub fn refill(self) -> Self {
        Self::default()
    }
}

/// Steady-state mode temperature for a cryostat temperature and absorbed
/// power: `T_mode = (T_cryo^n + p/a)^(1/n)`. Returns the configured
/// no-film temperature while the boil-off latch is set.
pub fn mode_temperature(
    t_cryostat: f64,
    p_abs: f64,
    model: &ThermalModel,
    film: &FilmState,
) -> Result<f64> {
    if !(t_cryostat > 0.0) {
        return Err(CoreError::Domain("cryostat temperature must be > 0 K"));
    }
    if !(p_abs >= 0.0) {
        return Err(CoreError::Domain("absorbed power must be >= 0 W"));
    }
    if film.boiled_off {
        return Ok(model.no_film_temperature);
    }
    let n = model.conductance_exponent;
    if p_abs == 0.0 {
        return Ok(t_cryostat);
    }
    let base = math::powf(t_cryostat, n) + p_abs / model.conductance_coefficient;
    Ok(math::powf(base, 1.0 / n))
}

/// Absorbed power above which evaporation outpaces the Landau-limited film
/// resupply: `P_crit = (L − ⟨μ_VDW⟩) · ṁ_max`.
pub fn critical_power(props: &HeliumProperties) -> f64 {
    props.effective_latent_heat() * materials::max_film_mass_flow(props)
}

/// Advances the film state machine for one operating point. The film forms
/// whenever the mode is below the transition temperature and the latch is
/// clear; the latch sets as soon as the absorbed power exceeds the critical
/// power and clears only via [`FilmState::refill`].
pub fn update_film_state(
    state: FilmState,
    t_mode: f64,
    p_abs: f64,
    props: &HeliumProperties,
) -> FilmState {
    if state.boiled_off || p_abs > critical_power(props) {
        return FilmState {
            present: false,
            boiled_off: true,
        };
    }
    FilmState {
        present: t_mode < props.transition_temperature,
        boiled_off: false,
    }
}

/// One row of a power sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSweepPoint {
    /// Absorbed power, W.
    pub p_abs: f64,
    /// Steady-state mode temperature, K.
    pub t_mode: f64,
    pub film: FilmState,
}

/// Sweeps the absorbed power over a logarithmic grid (linear if `p_min` is
/// zero) at fixed cryostat temperature, threading the film latch through the
/// points in ascending power order.
pub fn power_sweep(
    p_min: f64,
    p_max: f64,
    n_points: usize,
    t_cryostat: f64,
    model: &ThermalModel,
    props: &HeliumProperties,
) -> Result<Vec<PowerSweepPoint>> {
    if !(p_min >= 0.0 && p_min < p_max) {
        return Err(CoreError::Argument("power sweep requires 0 <= p_min < p_max"));
    }
    if n_points < 2 {
        return Err(CoreError::Argument("power sweep requires n_points >= 2"));
    }
    let mut out = Vec::with_capacity(n_points);
    let mut film = FilmState::default();
    for i in 0..n_points {
        let frac = i as f64 / (n_points - 1) as f64;
        let p = if i == 0 {
            p_min
        } else if i == n_points - 1 {
            p_max
        } else if p_min > 0.0 {
            math::exp(math::ln(p_min) + frac * (math::ln(p_max) - math::ln(p_min)))
        } else {
            p_min + frac * (p_max - p_min)
        };
        // Film formation depends on the temperature, which depends on the
        // latch; resolve at the pre-update latch state, then re-evaluate the
        // temperature if the film just boiled off.
        let t_tentative = mode_temperature(t_cryostat, p, model, &film)?;
        film = update_film_state(film, t_tentative, p, props);
        let t_mode = mode_temperature(t_cryostat, p, model, &film)?;
        out.push(PowerSweepPoint {
            p_abs: p,
            t_mode,
            film,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> ThermalModel {
        ThermalModel::default()
    }

    fn props() -> HeliumProperties {
        HeliumProperties::default()
    }

    fn clear() -> FilmState {
        FilmState::default()
    }

    #[test]
    fn no_power_means_cryostat_temperature() {
        let t = mode_temperature(1.234, 0.0, &model(), &clear()).unwrap();
        assert_eq!(t, 1.234);
    }

    #[test]
    fn plateau_anchor_reproduced() {
        // 100 nW injected ≙ 47 nW absorbed at the default conversion.
        let t = mode_temperature(0.32, 0.47e-7, &model(), &clear()).unwrap();
        assert!((t - 0.56).abs() < 0.02, "plateau temperature = {t}");
    }

    #[test]
    fn thermalized_regime_above_600_mk() {
        for t_cryo in [0.6, 0.7, 0.8, 1.0, 1.5, 3.0, 10.0] {
            let t = mode_temperature(t_cryo, 0.47e-7, &model(), &clear()).unwrap();
            assert!(
                (t - t_cryo) / t_cryo < 0.10,
                "poorly thermalized at {t_cryo} K: {t}"
            );
        }
        let t3 = mode_temperature(3.0, 0.47e-7, &model(), &clear()).unwrap();
        assert!((t3 - 3.0).abs() / 3.0 < 0.01);
    }

    #[test]
    fn critical_power_matches_calibration() {
        // 2.2 μW injected at the default 0.47 absorption.
        let p_crit = critical_power(&props());
        assert!(
            (p_crit - 0.47 * 2.2e-6).abs() < 0.05e-6 * 0.47,
            "critical power = {p_crit}"
        );
    }

    #[test]
    fn critical_power_scalings() {
        let p = props();
        let mut thick = p.clone();
        thick.film_thickness *= 2.0;
        assert!((critical_power(&thick) - 2.0 * critical_power(&p)).abs() <= critical_power(&p) * 1e-12);
        let mut frozen = p.clone();
        frozen.landau_velocity = 0.0;
        assert_eq!(critical_power(&frozen), 0.0);
    }

    #[test]
    fn film_forms_below_transition() {
        let s = update_film_state(clear(), 0.7, 1e-6 * 0.47, &props());
        assert!(s.present && !s.boiled_off);
    }

    #[test]
    fn film_absent_above_transition() {
        let s = update_film_state(clear(), 2.0, 0.5e-6, &props());
        assert!(!s.present && !s.boiled_off);
    }

    #[test]
    fn boil_off_latches_and_refills() {
        let p = props();
        let boiled = update_film_state(clear(), 0.7, 0.47 * 2.3e-6, &p);
        assert!(boiled.boiled_off && !boiled.present);
        // Latched: staying latched at low power and low temperature.
        let still = update_film_state(boiled, 0.5, 1e-9, &p);
        assert!(still.boiled_off && !still.present);
        // Mode temperature pinned at the no-film value while latched.
        let t = mode_temperature(0.32, 1e-9, &model(), &still).unwrap();
        assert_eq!(t, model().no_film_temperature);
        // Explicit refill clears the latch.
        let refilled = still.refill();
        let formed = update_film_state(refilled, 0.7, 1e-9, &p);
        assert!(formed.present && !formed.boiled_off);
    }

    #[test]
    fn power_sweep_endpoints_match_observed_range() {
        // 10 nW – 2.1 μW injected at base temperature: 0.51 K and 0.73 K
        // (±0.05), in absorbed units via the default 0.47 conversion.
        let sweep = power_sweep(0.47e-8, 0.47 * 2.1e-6, 50, 0.32, &model(), &props()).unwrap();
        let first = sweep.first().unwrap();
        let last = sweep.last().unwrap();
        assert!((first.t_mode - 0.51).abs() < 0.05, "low end {}", first.t_mode);
        assert!((last.t_mode - 0.73).abs() < 0.05, "high end {}", last.t_mode);
        assert!(sweep.iter().all(|pt| pt.film.present));
    }

    #[test]
    fn power_sweep_boils_off_past_threshold() {
        let sweep = power_sweep(0.47e-8, 0.47 * 3.3e-6, 120, 0.32, &model(), &props()).unwrap();
        let last = sweep.last().unwrap();
        assert!(last.film.boiled_off);
        assert!((last.t_mode - 3.0).abs() < 0.3, "post-boil-off {}", last.t_mode);
        // Every point after the first boiled one stays latched.
        let first_boiled = sweep.iter().position(|pt| pt.film.boiled_off).unwrap();
        assert!(sweep[first_boiled..].iter().all(|pt| pt.film.boiled_off));
        // Temperature is monotone non-decreasing below threshold.
        for w in sweep[..first_boiled].windows(2) {
            assert!(w[1].t_mode >= w[0].t_mode);
        }
    }

    #[test]
    fn power_sweep_two_points_returns_endpoints() {
        let sweep = power_sweep(1e-8, 1e-6, 2, 0.32, &model(), &props()).unwrap();
        assert_eq!(sweep.len(), 2);
        assert_eq!(sweep[0].p_abs, 1e-8);
        assert!((sweep[1].p_abs - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn power_sweep_rejects_bad_grid() {
        assert!(power_sweep(1e-6, 1e-8, 10, 0.32, &model(), &props()).is_err());
        assert!(power_sweep(1e-8, 1e-6, 1, 0.32, &model(), &props()).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_both_arguments(
            t1 in 0.05f64..10.0,
            dt in 0.0f64..5.0,
            p1 in 0.0f64..5e-6,
            dp in 0.0f64..5e-6,
        ) {
            let m = model();
            let f = clear();
            let base = mode_temperature(t1, p1, &m, &f).unwrap();
            let warmer = mode_temperature(t1 + dt, p1, &m, &f).unwrap();
            let stronger = mode_temperature(t1, p1 + dp, &m, &f).unwrap();
            prop_assert!(warmer >= base - 1e-12);
            prop_assert!(stronger >= base - 1e-12);
        }

        #[test]
        fn identity_at_zero_power(t in 0.05f64..10.0) {
            prop_assert_eq!(mode_temperature(t, 0.0, &model(), &clear()).unwrap(), t);
        }
    }
}

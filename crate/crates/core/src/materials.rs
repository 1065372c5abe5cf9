//! Helium-4 material constants and superfluid flow primitives.
//!
//! Three small pure functions live here: the RMS velocity of atoms
//! evaporating at a given temperature, the steady-state mass flow that
//! balances an absorbed heat load against evaporation, and the maximum rate
//! at which a thin film can resupply a hot region before the Landau critical
//! velocity is reached.

use crate::constants::{BOLTZMANN, HELIUM4_ATOM_MASS};
use crate::error::{CoreError, Result};
use crate::math;

/// Physical constants of the helium-4 film and its flow geometry.
///
/// The flow-geometry fields (`film_thickness`, `flow_width`, `density`,
/// `landau_velocity`) are calibration parameters: together they set the
/// Landau-limited resupply rate and hence the boil-off threshold power.
#[derive(Debug, Clone, PartialEq)]
pub struct HeliumProperties {
    /// Mass of one helium-4 atom, kg.
    pub atom_mass: f64,
    /// Latent heat of vaporization, J/kg.
    pub latent_heat: f64,
    /// Mean van der Waals binding potential of the film, J/kg.
    pub vdw_potential: f64,
    /// Landau critical velocity, m/s.
    pub landau_velocity: f64,
    /// Film superfluid transition temperature, K.
    pub transition_temperature: f64,
    /// Superfluid film thickness, m.
    pub film_thickness: f64,
    /// Effective width of the film flow cross-section, m.
    pub flow_width: f64,
    /// Superfluid density, kg/m³.
    pub density: f64,
}

impl HeliumProperties {
    pub fn new(
        atom_mass: f64,
        latent_heat: f64,
        vdw_potential: f64,
        landau_velocity: f64,
        transition_temperature: f64,
        film_thickness: f64,
        flow_width: f64,
        density: f64,
    ) -> Result<Self> {
        if !(atom_mass > 0.0) {
            return Err(CoreError::Config("atom_mass must be positive"));
        }
        if !(vdw_potential >= 0.0) {
            return Err(CoreError::Config("vdw_potential must be non-negative"));
        }
        if !(latent_heat > vdw_potential) {
            return Err(CoreError::Config(
                "latent_heat must exceed vdw_potential (effective latent heat would be non-positive)",
            ));
        }
        if !(landau_velocity >= 0.0) {
            return Err(CoreError::Config("landau_velocity must be non-negative"));
        }
        if !(transition_temperature > 0.0) {
            return Err(CoreError::Config("transition_temperature must be positive"));
        }
        if !(film_thickness > 0.0) {
            return Err(CoreError::Config("film_thickness must be positive"));
        }
        if !(flow_width > 0.0) {
            return Err(CoreError::Config("flow_width must be positive"));
        }
        if !(density > 0.0) {
            return Err(CoreError::Config("density must be positive"));
        }
        Ok(Self {
            atom_mass,
            latent_heat,
            vdw_potential,
            landau_velocity,
            transition_temperature,
            film_thickness,
            flow_width,
            density,
        })
    }

    /// Effective latent heat L − ⟨μ_VDW⟩, J/kg.
    #[inline]
    pub fn effective_latent_heat(&self) -> f64 {
        self.latent_heat - self.vdw_potential
    }
}

impl Default for HeliumProperties {
    /// Calibrated defaults.
    ///
    /// * `latent_heat` and `vdw_potential` give an effective latent heat of
    ///   2.4e4 J/kg, which puts the photoconvective/radiation-pressure force
    ///   ratio times finesse at ≈ 4×10⁵ for a 1 K evaporation temperature.
    /// * `flow_width` is solved from the boil-off condition so that with a
    ///   5 nm film, 145 kg/m³ superfluid density, a 60 m/s Landau velocity
    ///   and the default 0.47 injected→absorbed conversion, the film boils
    ///   off at 2.2 μW of injected power:
    ///   w = 0.47·2.2 μW / ((L−μ)·ρ·v_L·d).
    fn default() -> Self {
        Self {
            atom_mass: HELIUM4_ATOM_MASS,
            latent_heat: 2.59e4,
            vdw_potential: 1.9e3,
            landau_velocity: 60.0,
            transition_temperature: 0.85,
            film_thickness: 5e-9,
            flow_width: 9.904214559386972e-7,
            density: 145.0,
        }
    }
}

/// RMS velocity of helium atoms evaporating at temperature `t_evap`,
/// v = sqrt(3 k_B T / m). Monotone in T and scales as sqrt(T).
pub fn rms_evaporation_velocity(t_evap: f64, props: &HeliumProperties) -> Result<f64> {
    if !(t_evap >= 0.0) {
        return Err(CoreError::Domain("evaporation temperature must be >= 0 K"));
    }
    Ok(math::sqrt(3.0 * BOLTZMANN * t_evap / props.atom_mass))
}

/// Steady-state evaporation mass flow rate balancing an absorbed optical
/// power: ṁ = P / (L − ⟨μ_VDW⟩). Linear in the absorbed power.
pub fn steady_state_mass_flow(p_abs: f64, props: &HeliumProperties) -> Result<f64> {
    if !(p_abs >= 0.0) {
        return Err(CoreError::Domain("absorbed power must be >= 0 W"));
    }
    let l_eff = props.effective_latent_heat();
    if !(l_eff > 0.0) {
        return Err(CoreError::Config(
            "effective latent heat must be positive (latent_heat > vdw_potential)",
        ));
    }
    Ok(p_abs / l_eff)
}

/// Maximum mass flow the film can deliver before the Landau critical
/// velocity caps the superfluid flow: ṁ_max = ρ · v_L · d · w.
pub fn max_film_mass_flow(props: &HeliumProperties) -> f64 {
    props.density * props.landau_velocity * props.film_thickness * props.flow_width
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REL: f64 = 1e-12;

    fn props() -> HeliumProperties {
        HeliumProperties::default()
    }

    #[test]
    fn rms_velocity_zero_temperature() {
        assert_eq!(rms_evaporation_velocity(0.0, &props()).unwrap(), 0.0);
    }

    #[test]
    fn rms_velocity_at_one_kelvin() {
        // Direct evaluation of sqrt(3 kB / m_He): 78.9417 m/s.
        let v = rms_evaporation_velocity(1.0, &props()).unwrap();
        assert!((v - 78.94).abs() < 0.01, "v_rms(1 K) = {v}");
    }

    #[test]
    fn rms_velocity_sqrt_scaling() {
        let v1 = rms_evaporation_velocity(1.0, &props()).unwrap();
        let v4 = rms_evaporation_velocity(4.0, &props()).unwrap();
        assert!((v4 - 2.0 * v1).abs() <= 2.0 * v1 * REL);
    }

    #[test]
    fn rms_velocity_rejects_negative_temperature() {
        assert!(matches!(
            rms_evaporation_velocity(-0.1, &props()),
            Err(CoreError::Domain(_))
        ));
    }

    #[test]
    fn mass_flow_zero_power() {
        assert_eq!(steady_state_mass_flow(0.0, &props()).unwrap(), 0.0);
    }

    #[test]
    fn mass_flow_at_one_microwatt() {
        // 1e-6 / 2.4e4 = 4.1667e-11 kg/s with the default effective latent heat.
        let m = steady_state_mass_flow(1e-6, &props()).unwrap();
        assert!((m - 4.1667e-11).abs() < 1e-14, "mdot = {m}");
    }

    #[test]
    fn mass_flow_rejects_bad_latent_heat() {
        let bad = HeliumProperties::new(
            HELIUM4_ATOM_MASS,
            1.0e3,
            1.9e3, // vdw above latent heat
            60.0,
            0.85,
            5e-9,
            1e-6,
            145.0,
        );
        assert!(matches!(bad, Err(CoreError::Config(_))));
    }

    #[test]
    fn max_flow_zero_landau_velocity() {
        let mut p = props();
        p.landau_velocity = 0.0;
        assert_eq!(max_film_mass_flow(&p), 0.0);
    }

    #[test]
    fn max_flow_linear_in_thickness() {
        let p = props();
        let mut half = p.clone();
        half.film_thickness *= 0.5;
        let full = max_film_mass_flow(&p);
        let halved = max_film_mass_flow(&half);
        assert!((halved - 0.5 * full).abs() <= full * REL);
    }

    #[test]
    fn default_calibration_hits_boil_off_power() {
        // (L − μ)·ṁ_max must equal the absorbed-power boil-off threshold,
        // 0.47 × 2.2 μW (see `HeliumProperties::default`).
        let p = props();
        let p_crit = p.effective_latent_heat() * max_film_mass_flow(&p);
        assert!(
            (p_crit - 0.47 * 2.2e-6).abs() < 1e-12,
            "critical absorbed power = {p_crit}"
        );
    }

    proptest! {
        #[test]
        fn rms_velocity_quarter_temperature_halves(t in 0.0f64..50.0) {
            let p = props();
            let v = rms_evaporation_velocity(t, &p).unwrap();
            let v4 = rms_evaporation_velocity(4.0 * t, &p).unwrap();
            prop_assert!((v4 - 2.0 * v).abs() <= 2.0 * v * 1e-12 + 1e-300);
        }

        #[test]
        fn mass_flow_is_linear(p_abs in 0.0f64..1e-3, scale in 0.0f64..100.0) {
            let p = props();
            let base = steady_state_mass_flow(p_abs, &p).unwrap();
            let scaled = steady_state_mass_flow(scale * p_abs, &p).unwrap();
            prop_assert!((scaled - scale * base).abs() <= scale * base * 1e-12 + 1e-300);
        }

        #[test]
        fn outputs_non_negative(t in 0.0f64..100.0, p_abs in 0.0f64..1e-3) {
            let p = props();
            prop_assert!(rms_evaporation_velocity(t, &p).unwrap() >= 0.0);
            prop_assert!(steady_state_mass_flow(p_abs, &p).unwrap() >= 0.0);
            prop_assert!(max_film_mass_flow(&p) >= 0.0);
        }
    }
}

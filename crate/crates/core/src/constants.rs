//! Physical constants (CODATA 2018). Fixed at compile time; nothing here is
//! configurable.

/// Boltzmann constant, J/K (exact by SI definition).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant ħ, J·s (exact by SI definition of h).
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

/// Mass of one helium-4 atom, kg.
pub const HELIUM4_ATOM_MASS: f64 = 6.646_473_1e-27;

//! Simulation core for optically driven micromechanical resonators coated in
//! a thin superfluid helium film.
//!
//! The crate models the full measurement chain of a cryogenic microtoroid
//! experiment at desk scale:
//!
//! * [`materials`] — helium-4 constants and superfluid flow primitives
//!   (evaporation velocity, steady-state mass flow, Landau-limited resupply).
//! * [`forcing`] — radiation pressure, the evaporative-recoil
//!   (photoconvective) force, modal projections, and the frequency response
//!   of the superfluid forcing channel.
//! * [`thermal`] — steady-state mode temperature vs. cryostat temperature and
//!   absorbed power, plus the latched film boil-off state machine.
//! * [`dynamics`] — exact-discretization Langevin simulation of one
//!   mechanical mode under thermal noise, modulated optical drive, and
//!   feedback forces.
//! * [`spectral`] — Welch PSD estimation, Lorentzian fitting, integrated-PSD
//!   mode thermometry, and lock-in extraction of driven responses.
//! * [`feedback`] — cold-damping controller, closed-loop temperature theory
//!   (in-loop vs. out-of-loop), and simulated cooling curves.
//!
//! All quantities are SI; temperatures are absolute kelvin. The crate is
//! `no_std` (with `alloc`): all floating-point math routes through `libm`, so
//! results are bit-identical across platforms and test/production builds.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod feedback;
pub mod forcing;
pub mod materials;
pub mod rng;
pub mod spectral;
pub mod thermal;

mod fft;
mod levmar;
mod math;

pub use error::{CoreError, Result};

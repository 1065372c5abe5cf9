//! Error type shared by all core modules.

use core::fmt;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// An input lies outside the physical domain of an operation
    /// (e.g. a negative absolute temperature).
    Domain(&'static str),
    /// A parameter set violates a type invariant and cannot describe a
    /// physical configuration (e.g. latent heat not exceeding the van der
    /// Waals potential).
    Config(&'static str),
    /// An argument is structurally invalid for the requested operation
    /// (e.g. a Welch segment longer than the trace).
    Argument(&'static str),
    /// A spectral estimation failed; carries the fit diagnostics.
    Estimation {
        reason: &'static str,
        iterations: usize,
        cost: f64,
    },
    /// The integrator produced a non-finite state at the given output step.
    IntegratorFault { step: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Domain(what) => write!(f, "domain error: {what}"),
            CoreError::Config(what) => write!(f, "configuration error: {what}"),
            CoreError::Argument(what) => write!(f, "argument error: {what}"),
            CoreError::Estimation {
                reason,
                iterations,
                cost,
            } => write!(
                f,
                "estimation error: {reason} (after {iterations} iterations, cost {cost:e})"
            ),
            CoreError::IntegratorFault { step } => {
                write!(f, "integrator fault: non-finite state at output step {step}")
            }
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;

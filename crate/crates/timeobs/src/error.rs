//! Error types shared by all modules.

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum TimeObsError {
    /// An input lies outside the physical or numerical domain of an
    /// operation (non-positive energy, invalid parameter, argument guard).
    #[error("domain error: {0}")]
    Domain(String),

    /// A result or intermediate quantity leaves the representable range of
    /// `f64` (overflow or underflow to an unrepresentable magnitude).
    #[error("floating-point range error: {0}")]
    Overflow(String),

    /// Adaptive quadrature failed to reach the requested tolerance within
    /// the panel budget.  Carries the best estimate and its error bound.
    #[error(
        "quadrature did not converge after {panels} panels: \
         estimate {estimate}, residual {residual:.3e}"
    )]
    NonConvergence {
        /// Number of panels in use when the budget was exhausted.
        panels: usize,
        /// Best available estimate of the integral.
        estimate: Complex64,
        /// Error bound attached to the estimate.
        residual: f64,
    },

    /// A probability in a denominator is too small to condition on
    /// (vanishing transmission or reflection, rare post-selection).
    #[error("vanishing probability: {0}")]
    VanishingProbability(String),

    /// A conditional time diverges at this instant; `order` is the power of
    /// the vanishing probability near the singular point.
    #[error("singular conditional time: {message} (divergence order {order})")]
    Singular {
        /// Power with which the conditioning probability vanishes.
        order: u32,
        /// Description of the singular configuration.
        message: String,
    },

    /// The weak-measurement regime is violated too strongly for the
    /// first-order readout to be meaningful.
    #[error("weak-coupling regime violated: {0}")]
    Weakness(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, TimeObsError>;

//! Numerical library for time observables in one-dimensional quantum mechanics.
//!
//! The crate computes dwell, tunneling, reflection, asymptotic, and arrival
//! times for particles scattering off simple barriers, using the weak-value
//! formalism in which a time observable splits into a real part and an
//! imaginary (detector-dependent) correction.  It also provides an
//! independent system-detector simulator that reproduces those observables
//! from first principles, plus closed-form results for a driven two-level
//! system used as cross-checks.
//!
//! Modules:
//!
//! * [`numerics`]: complex error function, adaptive quadrature, differentiation.
//! * [`scattering`]: stationary scattering states for free, delta, and
//!   rectangular barriers.
//! * [`wavepacket`]: Gaussian packets and their energy-representation
//!   amplitudes.
//! * [`time_densities`]: spatial densities of dwell, tunneling, and
//!   reflection times, and asymptotic tunneling times.
//! * [`weak_sim`]: system-detector weak-measurement simulator.
//! * [`two_level`]: closed-form dwell and conditional times for a Rabi-driven
//!   two-level system.
//! * [`arrival`]: arrival-time operators, their momentum matrix elements, and
//!   the classical arrival current.

pub mod arrival;
pub mod error;
pub mod numerics;
pub mod scattering;
pub mod time_densities;
pub mod two_level;
pub mod wavepacket;
pub mod weak_sim;

pub use error::{Result, TimeObsError};

//! Gaussian wave packets and their energy-representation amplitudes.
//!
//! Packets are specified in momentum space with mean momentum, momentum
//! spread, and a starting center far to the left of the barrier.  The
//! energy amplitude projects the packet on the left-incident scattering
//! states; because the packet moves rightward and starts left of the
//! barrier, only that family contributes.

use crate::error::{Result, TimeObsError};
use crate::numerics::{integrate_real, QuadratureSpec};
use crate::scattering::{amplitudes, momentum_from_energy, BarrierModel, UnitsConvention};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Minimum ratio of mean momentum to momentum spread.  At 5 the truncated
/// negative-momentum mass is below 1e-6, so dropping it (without
/// renormalizing) keeps every probability integral accurate to that level.
const MIN_MOMENTUM_RATIO: f64 = 5.0;

/// Gaussian momentum-space wave packet.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPacket {
    /// Mean momentum, positive (the packet moves to the right).
    pub p_mean: f64,
    /// Momentum standard deviation.
    pub sigma: f64,
    /// Center position at t = 0, strictly negative (left of the barrier).
    pub x0: f64,
}

impl GaussianPacket {
    /// Packet with the default starting center -min(10/sigma, 1e4), far
    /// enough left that the packet and the barrier region do not overlap.
    pub fn new(p_mean: f64, sigma: f64) -> Result<Self> {
        let x0 = -(10.0 / sigma).min(1e4);
        Self::with_start(p_mean, sigma, x0)
    }

    /// Packet with an explicit starting center x0 < 0.
    pub fn with_start(p_mean: f64, sigma: f64, x0: f64) -> Result<Self> {
        let ok = p_mean.is_finite()
            && p_mean > 0.0
            && sigma.is_finite()
            && sigma > 0.0
            && x0.is_finite()
            && x0 < 0.0;
        if !ok {
            return Err(TimeObsError::Domain(format!(
                "packet requires p_mean > 0, sigma > 0, x0 < 0; got \
                 p_mean={p_mean}, sigma={sigma}, x0={x0}"
            )));
        }
        if p_mean / sigma < MIN_MOMENTUM_RATIO {
            return Err(TimeObsError::Domain(format!(
                "packet requires p_mean / sigma >= {MIN_MOMENTUM_RATIO} so the \
                 negative-momentum tail is negligible; got {}",
                p_mean / sigma
            )));
        }
        Ok(GaussianPacket { p_mean, sigma, x0 })
    }

    /// Real envelope (2 pi sigma^2)^(-1/4) exp(-(p - p_mean)^2 / (4 sigma^2)).
    pub fn momentum_envelope(&self, p: f64) -> f64 {
        let d = p - self.p_mean;
        (2.0 * PI * self.sigma * self.sigma).powf(-0.25)
            * (-d * d / (4.0 * self.sigma * self.sigma)).exp()
    }

    /// Momentum wavefunction at t = 0, the envelope carrying the
    /// center-position phase exp(-i p x0 / hbar).
    pub fn momentum_wavefunction(&self, p: f64, units: &UnitsConvention) -> Complex64 {
        self.momentum_envelope(p) * Complex64::new(0.0, -p * self.x0 / units.hbar).exp()
    }

    /// Position-space standard deviation hbar / (2 sigma).
    pub fn spatial_width(&self, units: &UnitsConvention) -> f64 {
        units.hbar / (2.0 * self.sigma)
    }

    /// Energy interval covering the packet out to eight momentum widths,
    /// floored at 1e-12 to stay inside the E > 0 domain.
    pub fn energy_window(&self, units: &UnitsConvention) -> (f64, f64) {
        let p_lo = (self.p_mean - 8.0 * self.sigma).max(0.0);
        let p_hi = self.p_mean + 8.0 * self.sigma;
        let lo = (p_lo * p_lo / (2.0 * units.mass)).max(1e-12);
        let hi = p_hi * p_hi / (2.0 * units.mass);
        (lo, hi)
    }

    /// Mean energy p_mean^2 / (2 M) of the packet center.
    pub fn mean_energy(&self, units: &UnitsConvention) -> f64 {
        self.p_mean * self.p_mean / (2.0 * units.mass)
    }
}

/// Projection of the packet on the left-incident scattering states,
/// evaluated as a function of energy.
#[derive(Debug, Clone, Copy)]
pub struct EnergyAmplitude {
    packet: GaussianPacket,
    units: UnitsConvention,
}

impl EnergyAmplitude {
    /// Amplitude function for the given packet and units.
    pub fn new(packet: GaussianPacket, units: UnitsConvention) -> Self {
        EnergyAmplitude { packet, units }
    }

    /// Full complex amplitude sqrt(M / p) phi(p_E) exp(-i p_E x0 / hbar).
    pub fn eval(&self, e: f64) -> Result<Complex64> {
        let p = momentum_from_energy(e, &self.units)?;
        Ok((self.units.mass / p).sqrt() * self.packet.momentum_wavefunction(p, &self.units))
    }

    /// Center-phase-stripped real amplitude sqrt(M / p) phi(p_E).
    pub fn modulus(&self, e: f64) -> Result<f64> {
        let p = momentum_from_energy(e, &self.units)?;
        Ok((self.units.mass / p).sqrt() * self.packet.momentum_envelope(p))
    }

    /// Energy weight (M / p) phi(p_E)^2, the squared modulus.
    pub fn weight(&self, e: f64) -> Result<f64> {
        let p = momentum_from_energy(e, &self.units)?;
        let env = self.packet.momentum_envelope(p);
        Ok(self.units.mass / p * env * env)
    }

    /// The underlying packet.
    pub fn packet(&self) -> &GaussianPacket {
        &self.packet
    }

    /// The unit system in use.
    pub fn units(&self) -> &UnitsConvention {
        &self.units
    }
}

/// Energy-representation amplitude of the packet at energy E.
pub fn energy_amplitude(
    packet: &GaussianPacket,
    e: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    EnergyAmplitude::new(*packet, *units).eval(e)
}

/// Probability that the packet is transmitted through the barrier,
/// integral of the energy weight times |t(E)|^2 over the packet's window.
pub fn transmission_probability(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    units: &UnitsConvention,
) -> Result<f64> {
    let amp = EnergyAmplitude::new(*packet, *units);
    let (lo, hi) = packet.energy_window(units);
    let spec = QuadratureSpec::new(lo, hi)
        .with_rel_tol(1e-10)
        .with_initial_panels(8);
    integrate_real(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            Ok(amp.weight(e)? * a.transmission())
        },
        &spec,
    )
}

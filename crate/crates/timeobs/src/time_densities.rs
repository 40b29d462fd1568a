//! Dwell, tunneling, correction, and reflection time densities, and the
//! asymptotic tunneling time.
//!
//! Every density is an energy integral over the incident packet's weight
//! w(E).  The conditional densities come from a complex kernel built from
//! the two scattering eigenfunctions at each energy: its real part gives
//! the flux-conditioned time density and its imaginary part the
//! detector-dependent correction.  The reflection kernel is obtained by
//! replacing the transmission flux projection with its complement, so the
//! decomposition of the dwell density into transmission and reflection
//! parts holds identically and its numerical residual measures only
//! quadrature error and scattering-matrix unitarity.

use crate::error::{Result, TimeObsError};
use crate::numerics::{d_de, integrate, integrate_real, QuadratureSpec};
use crate::scattering::{
    amplitudes, eigenfunction_with, momentum_from_energy, BarrierModel, Incidence,
    ScatteringAmplitudes, UnitsConvention,
};
use crate::wavepacket::{transmission_probability, EnergyAmplitude, GaussianPacket};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Probabilities below this cannot be conditioned on.
const MIN_PROBABILITY: f64 = 1e-300;

/// Tolerances for the energy integrals behind every density.
#[derive(Debug, Clone, Copy)]
pub struct EnergyQuadrature {
    /// Relative tolerance of each adaptive energy integral.
    pub rel_tol: f64,
    /// Panel budget of each adaptive energy integral.
    pub max_panels: usize,
}

impl Default for EnergyQuadrature {
    fn default() -> Self {
        EnergyQuadrature {
            rel_tol: 1e-8,
            max_panels: 40_000,
        }
    }
}

impl EnergyQuadrature {
    /// Validated quadrature settings.
    pub fn new(rel_tol: f64, max_panels: usize) -> Result<Self> {
        if rel_tol.is_finite() && rel_tol > 0.0 && max_panels >= 1 {
            Ok(EnergyQuadrature {
                rel_tol,
                max_panels,
            })
        } else {
            Err(TimeObsError::Domain(format!(
                "quadrature settings require rel_tol > 0 and max_panels >= 1, \
                 got rel_tol={rel_tol}, max_panels={max_panels}"
            )))
        }
    }
}

/// Number of initial panels resolving the exp(2 i p x / hbar) interference
/// factor across the packet's energy window.
fn oscillation_panels(packet: &GaussianPacket, units: &UnitsConvention, x: f64) -> usize {
    let dk = 16.0 * packet.sigma / units.hbar;
    (2.0 * x.abs() * dk / 1.5).ceil() as usize + 4
}

fn window_spec(amp: &EnergyAmplitude, x: f64, quad: &EnergyQuadrature) -> QuadratureSpec {
    let (lo, hi) = amp.packet().energy_window(amp.units());
    let panels = oscillation_panels(amp.packet(), amp.units(), x);
    QuadratureSpec::new(lo, hi)
        .with_rel_tol(quad.rel_tol)
        .with_abs_tol(1e-10)
        .with_initial_panels(panels)
        .with_max_panels(quad.max_panels.max(panels * 8))
}

/// Complex transmission-time kernel at one energy and position,
/// 2 pi hbar conj(u+) (u+ |t|^2 - u- conj(t) r).
fn transmit_kernel(
    barrier: &BarrierModel,
    amps: &ScatteringAmplitudes,
    x: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    let up = eigenfunction_with(barrier, amps, Incidence::FromLeft, x, units)?;
    let um = eigenfunction_with(barrier, amps, Incidence::FromRight, x, units)?;
    Ok(
        2.0 * PI
            * units.hbar
            * up.conj()
            * (up * amps.transmission() - um * amps.t.conj() * amps.r),
    )
}

/// Complex reflection-time kernel, the transmission kernel with the flux
/// projection complemented: 2 pi hbar conj(u+) (u+ |r|^2 + u- conj(t) r).
fn reflect_kernel(
    barrier: &BarrierModel,
    amps: &ScatteringAmplitudes,
    x: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    let up = eigenfunction_with(barrier, amps, Incidence::FromLeft, x, units)?;
    let um = eigenfunction_with(barrier, amps, Incidence::FromRight, x, units)?;
    Ok(2.0 * PI * units.hbar * up.conj() * (up * amps.reflection() + um * amps.t.conj() * amps.r))
}

/// Packet-weighted energy integrals of the dwell integrand and the two
/// conditional kernels at one position: (dwell, transmit, reflect).
fn density_integrals(
    barrier: &BarrierModel,
    amp: &EnergyAmplitude,
    x: f64,
    quad: &EnergyQuadrature,
) -> Result<(f64, Complex64, Complex64)> {
    let units = *amp.units();
    let spec = window_spec(amp, x, quad);
    let dwell = integrate_real(
        |e| {
            let a = amplitudes(barrier, e, &units)?;
            let up = eigenfunction_with(barrier, &a, Incidence::FromLeft, x, &units)?;
            Ok(2.0 * PI * units.hbar * up.norm_sqr() * amp.weight(e)?)
        },
        &spec,
    )?;
    let transmit = integrate(
        |e| {
            let a = amplitudes(barrier, e, &units)?;
            Ok(transmit_kernel(barrier, &a, x, &units)? * amp.weight(e)?)
        },
        &spec,
    )?;
    let reflect = integrate(
        |e| {
            let a = amplitudes(barrier, e, &units)?;
            Ok(reflect_kernel(barrier, &a, x, &units)? * amp.weight(e)?)
        },
        &spec,
    )?;
    Ok((dwell, transmit, reflect))
}

/// Dwell time density 2 pi hbar Int dE w(E) |u+(x)|^2.
pub fn dwell_density(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    x: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<f64> {
    let amp = EnergyAmplitude::new(*packet, *units);
    let spec = window_spec(&amp, x, quad);
    integrate_real(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            let up = eigenfunction_with(barrier, &a, Incidence::FromLeft, x, units)?;
            Ok(2.0 * PI * units.hbar * up.norm_sqr() * amp.weight(e)?)
        },
        &spec,
    )
}

/// Transmission-conditioned time density, the real part of the kernel
/// integral divided by the transmission probability.
pub fn tunnel_density(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    x: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<f64> {
    let t = checked_transmission(packet, barrier, units)?;
    let amp = EnergyAmplitude::new(*packet, *units);
    let spec = window_spec(&amp, x, quad);
    let kernel = integrate(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            Ok(transmit_kernel(barrier, &a, x, units)? * amp.weight(e)?)
        },
        &spec,
    )?;
    Ok(kernel.re / t)
}

/// Detector-dependent correction density accompanying [`tunnel_density`],
/// minus the imaginary part of the kernel integral over the transmission
/// probability.
pub fn tunnel_correction_density(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    x: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<f64> {
    let t = checked_transmission(packet, barrier, units)?;
    let amp = EnergyAmplitude::new(*packet, *units);
    let spec = window_spec(&amp, x, quad);
    let kernel = integrate(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            Ok(transmit_kernel(barrier, &a, x, units)? * amp.weight(e)?)
        },
        &spec,
    )?;
    Ok(-kernel.im / t)
}

/// Reflection-conditioned time density; may be negative behind the
/// barrier.
pub fn reflect_density(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    x: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<f64> {
    let t = transmission_probability(packet, barrier, units)?;
    let r = 1.0 - t;
    if r < MIN_PROBABILITY {
        return Err(TimeObsError::VanishingProbability(format!(
            "reflection probability {r:.3e} is too small to condition on"
        )));
    }
    let amp = EnergyAmplitude::new(*packet, *units);
    let spec = window_spec(&amp, x, quad);
    let kernel = integrate(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            Ok(reflect_kernel(barrier, &a, x, units)? * amp.weight(e)?)
        },
        &spec,
    )?;
    Ok(kernel.re / r)
}

fn checked_transmission(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    units: &UnitsConvention,
) -> Result<f64> {
    let t = transmission_probability(packet, barrier, units)?;
    if t < MIN_PROBABILITY {
        return Err(TimeObsError::VanishingProbability(format!(
            "transmission probability {t:.3e} is too small to condition on"
        )));
    }
    Ok(t)
}

/// All four time densities on a spatial grid, with the probabilities and
/// the quasimonochromatic reference times attached.
#[derive(Debug, Clone)]
pub struct TimeDensityProfile {
    /// The incident packet.
    pub packet: GaussianPacket,
    /// The barrier.
    pub barrier: BarrierModel,
    /// Strictly increasing grid positions.
    pub xs: Vec<f64>,
    /// Dwell time density per grid point.
    pub dwell: Vec<f64>,
    /// Transmission-conditioned time density per grid point.
    pub tunnel: Vec<f64>,
    /// Detector correction density per grid point.
    pub tunnel_correction: Vec<f64>,
    /// Reflection-conditioned time density per grid point; NaN for a free
    /// particle, which is never reflected.
    pub reflect: Vec<f64>,
    /// Packet transmission probability.
    pub transmission: f64,
    /// Packet reflection probability.
    pub reflection: f64,
    /// Phase time hbar d(arg t)/dE at the packet's mean energy.
    pub phase_time: f64,
    /// Imaginary time hbar d(ln|t|)/dE at the packet's mean energy.
    pub imaginary_time: f64,
}

/// Uniform grid of `points` positions covering [x_min, x_max].
pub fn uniform_grid(x_min: f64, x_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) || points < 2 {
        return Err(TimeObsError::Domain(format!(
            "grid requires x_min < x_max and at least 2 points, got \
             [{x_min}, {x_max}] with {points} points"
        )));
    }
    let step = (x_max - x_min) / (points - 1) as f64;
    Ok((0..points).map(|i| x_min + step * i as f64).collect())
}

/// Evaluates all four densities on the grid.  Grid points are processed
/// in parallel; the result does not depend on the evaluation order.
pub fn profile(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    xs: &[f64],
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<TimeDensityProfile> {
    if xs.len() < 2 || !xs.windows(2).all(|w| w[0] < w[1]) {
        return Err(TimeObsError::Domain(
            "density grid must be strictly increasing with at least 2 points".into(),
        ));
    }
    let transmission = checked_transmission(packet, barrier, units)?;
    let reflection = 1.0 - transmission;
    let reflecting = reflection >= MIN_PROBABILITY;
    let amp = EnergyAmplitude::new(*packet, *units);

    let rows: Vec<(f64, f64, f64, f64)> = xs
        .par_iter()
        .map(|&x| -> Result<(f64, f64, f64, f64)> {
            let (dwell, transmit, reflect) = density_integrals(barrier, &amp, x, quad)?;
            let tau_refl = if reflecting {
                reflect.re / reflection
            } else {
                f64::NAN
            };
            Ok((
                dwell,
                transmit.re / transmission,
                -transmit.im / transmission,
                tau_refl,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let logder = transmission_log_derivative(barrier, packet.mean_energy(units), units)?;
    let mut dwell = Vec::with_capacity(xs.len());
    let mut tunnel = Vec::with_capacity(xs.len());
    let mut tunnel_correction = Vec::with_capacity(xs.len());
    let mut reflect = Vec::with_capacity(xs.len());
    for (d, t, c, r) in rows {
        dwell.push(d);
        tunnel.push(t);
        tunnel_correction.push(c);
        reflect.push(r);
    }
    Ok(TimeDensityProfile {
        packet: *packet,
        barrier: *barrier,
        xs: xs.to_vec(),
        dwell,
        tunnel,
        tunnel_correction,
        reflect,
        transmission,
        reflection,
        phase_time: units.hbar * logder.im,
        imaginary_time: units.hbar * logder.re,
    })
}

/// Logarithmic energy derivative t'(E)/t(E) of the transmission
/// amplitude.
pub fn transmission_log_derivative(
    barrier: &BarrierModel,
    e: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    let t = amplitudes(barrier, e, units)?.t;
    let dt = d_de(|en| Ok(amplitudes(barrier, en, units)?.t), e)?;
    Ok(dt / t)
}

/// Arrival-referenced asymptotic times of the transmitted packet.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticTimes {
    /// Mean transmission-conditioned arrival time at the reference point,
    /// measured from a packet center frozen at the origin.
    pub tunneling_time: f64,
    /// Phase time hbar d(arg t)/dE at the mean energy.
    pub phase_time: f64,
    /// Imaginary time hbar d(ln|t|)/dE at the mean energy.
    pub imaginary_time: f64,
    /// Detector-correction integral spanning the barrier and the packet
    /// preparation zone; vanishingly small for these packets.
    pub correction_integral: f64,
}

/// Asymptotic tunneling time at a reference position x2 behind the
/// barrier.
///
/// The time is referenced to a packet centered at the origin: the
/// center-position phase of the incident amplitude is stripped, so the
/// free-flight contribution is M x2 / p rather than M (x2 - x0) / p and
/// the quasimonochromatic limit of tunneling_time - M x2 / p_mean is the
/// phase time.  The correction integral gathers the imaginary-kernel
/// contributions of both the barrier region and the packet zone; for
/// real origin-centered envelopes it integrates to zero up to quadrature
/// error.
pub fn asymptotic_times(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    x2: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<AsymptoticTimes> {
    if !(x2.is_finite() && x2 > barrier.support_width()) {
        return Err(TimeObsError::Domain(format!(
            "reference position x2 = {x2} must lie behind the barrier"
        )));
    }
    let t_prob = checked_transmission(packet, barrier, units)?;
    let amp = EnergyAmplitude::new(*packet, *units);
    let (lo, hi) = packet.energy_window(units);
    let spec = QuadratureSpec::new(lo, hi)
        .with_rel_tol(quad.rel_tol)
        .with_abs_tol(1e-10)
        .with_initial_panels(8)
        .with_max_panels(quad.max_panels);

    let tunneling_time = integrate_real(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            let p = momentum_from_energy(e, units)?;
            let logder = transmission_log_derivative(barrier, e, units)?;
            Ok(amp.weight(e)? * a.transmission() * (units.mass / p * x2 + units.hbar * logder.im))
        },
        &spec,
    )? / t_prob;

    let correction_integral = -units.hbar / t_prob
        * integrate_real(
            |e| {
                let a = amplitudes(barrier, e, units)?;
                let logder = transmission_log_derivative(barrier, e, units)?;
                let g = amp.modulus(e)?;
                Ok(a.transmission()
                    * (amp.weight(e)? * logder.re + g * envelope_derivative(packet, e, units)))
            },
            &spec,
        )?;

    let logder = transmission_log_derivative(barrier, packet.mean_energy(units), units)?;
    Ok(AsymptoticTimes {
        tunneling_time,
        phase_time: units.hbar * logder.im,
        imaginary_time: units.hbar * logder.re,
        correction_integral,
    })
}

/// Energy derivative of the center-phase-stripped amplitude
/// sqrt(M/p) phi(p_E).
fn envelope_derivative(packet: &GaussianPacket, e: f64, units: &UnitsConvention) -> f64 {
    let p = (2.0 * units.mass * e).sqrt();
    let g = (units.mass / p).sqrt() * packet.momentum_envelope(p);
    units.mass / p
        * g
        * (-(p - packet.p_mean) / (2.0 * packet.sigma * packet.sigma) - 1.0 / (2.0 * p))
}

/// Packet-averaged integral of the correction density over [x1, x2],
/// using per-energy antiderivatives outside the barrier support and an
/// adaptive quadrature inside it.  Over a region enclosing both the
/// barrier and the packet's mirror zone this integral approaches minus
/// the imaginary time.
pub fn region_correction_time(
    packet: &GaussianPacket,
    barrier: &BarrierModel,
    x1: f64,
    x2: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<f64> {
    if !(x1.is_finite() && x2.is_finite() && x1 < x2) {
        return Err(TimeObsError::Domain(format!(
            "region requires x1 < x2, got [{x1}, {x2}]"
        )));
    }
    let t_prob = checked_transmission(packet, barrier, units)?;
    let amp = EnergyAmplitude::new(*packet, *units);
    let reach = x1.abs().max(x2.abs());
    let spec = window_spec(&amp, reach, quad);
    let kernel = integrate(
        |e| {
            let a = amplitudes(barrier, e, units)?;
            Ok(region_kernel_integral(barrier, &a, x1, x2, units)? * amp.weight(e)?)
        },
        &spec,
    )?;
    Ok(-kernel.im / t_prob)
}

/// Integral over [x1, x2] of the transmission kernel at one energy.
fn region_kernel_integral(
    barrier: &BarrierModel,
    amps: &ScatteringAmplitudes,
    x1: f64,
    x2: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    let p = momentum_from_energy(amps.energy, units)?;
    let k = p / units.hbar;
    let l = barrier.support_width();
    let mp = units.mass / p;
    let two_ik = Complex64::new(0.0, 2.0 * k);
    let mut total = Complex64::new(0.0, 0.0);

    // Left of the barrier the kernel is (M/p)|t|^2 (1 + conj(r) e^{2ikx}).
    if x1 < 0.0 {
        let (a, b) = (x1, x2.min(0.0));
        let osc = (Complex64::new(0.0, 2.0 * k * b).exp() - Complex64::new(0.0, 2.0 * k * a).exp())
            / two_ik;
        total += mp * amps.transmission() * (Complex64::new(b - a, 0.0) + amps.r.conj() * osc);
    }
    // Behind it the kernel is (M/p)(|t|^2 - conj(t)^2 r e^{-2ikx}).
    if x2 > l {
        let (a, b) = (x1.max(l), x2);
        let osc = (Complex64::new(0.0, -2.0 * k * b).exp()
            - Complex64::new(0.0, -2.0 * k * a).exp())
            / two_ik;
        total += mp
            * (Complex64::new(amps.transmission() * (b - a), 0.0)
                + amps.t.conj() * amps.t.conj() * amps.r * osc);
    }
    // Inside, integrate the matched interior eigenfunctions numerically.
    let (lo, hi) = (x1.max(0.0), x2.min(l));
    if hi > lo {
        let panels = (k * (hi - lo) / 1.5).ceil() as usize + 2;
        let interior_spec = QuadratureSpec::new(lo, hi)
            .with_rel_tol(1e-9)
            .with_abs_tol(1e-12)
            .with_initial_panels(panels)
            .with_max_panels(panels * 64);
        total += integrate(|x| transmit_kernel(barrier, amps, x, units), &interior_spec)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> UnitsConvention {
        UnitsConvention::default()
    }

    fn paper_packet() -> GaussianPacket {
        GaussianPacket::new(1.0, 0.001).unwrap()
    }

    fn delta_barrier() -> BarrierModel {
        BarrierModel::Delta { strength: 2.0 }
    }

    #[test]
    fn free_particle_densities_are_flat() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let xs = uniform_grid(-5.0, 7.0, 7).unwrap();
        let prof = profile(&packet, &BarrierModel::Free, &xs, &u, &quad).unwrap();
        assert!((prof.transmission - 1.0).abs() < 1e-9);
        for i in 0..xs.len() {
            assert!(
                (prof.dwell[i] - 1.0).abs() < 1e-3,
                "dwell {}",
                prof.dwell[i]
            );
            assert!((prof.tunnel[i] - 1.0).abs() < 1e-3);
            assert!(prof.tunnel_correction[i].abs() < 1e-9);
            assert!(prof.reflect[i].is_nan());
        }
        assert_eq!(prof.phase_time, 0.0);
        assert!(matches!(
            reflect_density(&packet, &BarrierModel::Free, 1.0, &u, &quad),
            Err(TimeObsError::VanishingProbability(_))
        ));
    }

    #[test]
    fn point_operations_agree_with_the_profile() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let xs = [-3.7, 4.2];
        let prof = profile(&packet, &delta_barrier(), &xs, &u, &quad).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let d = dwell_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            let t = tunnel_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            let c = tunnel_correction_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            let r = reflect_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            assert!((d - prof.dwell[i]).abs() < 1e-9);
            assert!((t - prof.tunnel[i]).abs() < 1e-7);
            assert!((c - prof.tunnel_correction[i]).abs() < 1e-7);
            assert!((r - prof.reflect[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn delta_densities_match_the_monochromatic_closed_forms() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        // At the packet's peak energy E = 0.5: t = 0.2 - 0.4i, r = t - 1.
        let t = Complex64::new(0.2, -0.4);
        let r = t - 1.0;
        let tt = t.norm_sqr();
        let rr = r.norm_sqr();
        let k = 1.0;

        for &x in &[-8.3, -4.9] {
            let phase = Complex64::new(0.0, -2.0 * k * x).exp();
            let want_dwell = 1.0 + rr + 2.0 * (r * phase).re;
            let got = dwell_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            assert!(
                (got - want_dwell).abs() < 2e-2,
                "x={x}: {got} vs {want_dwell}"
            );

            let want_tun = 1.0 + (r * phase).re;
            let got = tunnel_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            assert!((got - want_tun).abs() < 2e-2);

            let want_corr = (r * phase).im;
            let got = tunnel_correction_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            assert!(
                (got - want_corr).abs() < 2e-2,
                "x={x}: {got} vs {want_corr}"
            );

            let want_refl = (2.0 * rr + (1.0 + rr) * (r * phase).re) / rr;
            let got = reflect_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            assert!(
                (got - want_refl).abs() < 5e-2,
                "x={x}: {got} vs {want_refl}"
            );
        }

        for &x in &[5.7, 9.2] {
            let phase = Complex64::new(0.0, -2.0 * k * x).exp();
            let ratio = (t.conj() / t * r * phase).re;
            let got = tunnel_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            assert!((got - (1.0 - ratio)).abs() < 2e-2);
            let got = reflect_density(&packet, &delta_barrier(), x, &u, &quad).unwrap();
            let want = tt * ratio / rr;
            assert!((got - want).abs() < 2e-2, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn dwell_decomposes_into_transmission_and_reflection_parts() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let cases = [
            (delta_barrier(), uniform_grid(-10.0, 10.0, 41).unwrap()),
            (
                BarrierModel::Rectangular {
                    height: 2.0,
                    width: 5.0,
                },
                uniform_grid(-3.0, 8.0, 45).unwrap(),
            ),
        ];
        for (barrier, xs) in cases {
            let prof = profile(&packet, &barrier, &xs, &u, &quad).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                assert!(prof.dwell[i] >= -1e-8);
                let recombined =
                    prof.transmission * prof.tunnel[i] + prof.reflection * prof.reflect[i];
                let residual = (prof.dwell[i] - recombined).abs();
                assert!(
                    residual <= 1e-6 * prof.dwell[i].abs().max(1.0),
                    "{barrier:?} at x={x}: residual {residual:.3e}"
                );
            }
        }
    }

    #[test]
    fn dwell_fringes_have_the_half_wavelength_period() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let xs = uniform_grid(-12.0, -2.0, 2001).unwrap();
        let prof = profile(&packet, &delta_barrier(), &xs, &u, &quad).unwrap();
        let mut maxima = Vec::new();
        for (window, &x) in prof.dwell.windows(3).zip(&xs[1..]) {
            if window[1] > window[0] && window[1] > window[2] {
                maxima.push(x);
            }
        }
        assert!(maxima.len() >= 3, "found {} maxima", maxima.len());
        let spacing =
            (maxima.last().unwrap() - maxima.first().unwrap()) / (maxima.len() - 1) as f64;
        let expected = PI * u.hbar / packet.p_mean;
        assert!(
            (spacing / expected - 1.0).abs() < 0.02,
            "spacing {spacing} vs {expected}"
        );
    }

    #[test]
    fn asymptotic_time_reduces_to_free_flight_without_a_barrier() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let x2 = 150.0;
        let times = asymptotic_times(&packet, &BarrierModel::Free, x2, &u, &quad).unwrap();
        assert!((times.tunneling_time - x2).abs() < 1e-3 * x2);
        assert_eq!(times.phase_time, 0.0);
        assert_eq!(times.imaginary_time, 0.0);
        assert!(times.correction_integral.abs() < 1e-6);
    }

    #[test]
    fn delta_asymptotic_time_approaches_the_phase_time() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let x2 = 100.0;
        let times = asymptotic_times(&packet, &delta_barrier(), x2, &u, &quad).unwrap();
        assert!((times.phase_time - 0.4).abs() < 1e-9);
        assert!((times.imaginary_time - 0.8).abs() < 1e-9);
        let excess = times.tunneling_time - x2 * u.mass / packet.p_mean;
        assert!(
            (excess - times.phase_time).abs() <= 1e-2 * times.phase_time,
            "excess {excess} vs phase time {}",
            times.phase_time
        );
        assert!(times.correction_integral.abs() <= 1e-2 * times.phase_time);
    }

    #[test]
    fn correction_density_integrates_to_minus_the_imaginary_time() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        let got =
            region_correction_time(&packet, &delta_barrier(), -3000.0, 3000.0, &u, &quad).unwrap();
        let times = asymptotic_times(&packet, &delta_barrier(), 100.0, &u, &quad).unwrap();
        assert!(
            (got + times.imaginary_time).abs() < 2e-2 * times.imaginary_time.abs(),
            "region integral {got} vs -imaginary time {}",
            -times.imaginary_time
        );
    }

    #[test]
    fn region_integral_covers_the_rectangular_interior() {
        let u = units();
        let packet = GaussianPacket::new(1.0, 0.001).unwrap();
        let barrier = BarrierModel::Rectangular {
            height: 2.0,
            width: 5.0,
        };
        let quad = EnergyQuadrature::default();
        let got = region_correction_time(&packet, &barrier, -2000.0, 2000.0, &u, &quad).unwrap();
        let times = asymptotic_times(&packet, &barrier, 100.0, &u, &quad).unwrap();
        assert!(
            (got + times.imaginary_time).abs() < 2e-2 * times.imaginary_time.abs(),
            "region integral {got} vs -imaginary time {}",
            -times.imaginary_time
        );
    }

    #[test]
    fn input_validation() {
        let u = units();
        let packet = paper_packet();
        let quad = EnergyQuadrature::default();
        assert!(uniform_grid(1.0, 1.0, 10).is_err());
        assert!(uniform_grid(0.0, 1.0, 1).is_err());
        assert!(EnergyQuadrature::new(0.0, 100).is_err());
        assert!(EnergyQuadrature::new(1e-8, 0).is_err());
        assert!(profile(&packet, &delta_barrier(), &[0.0, 0.0], &u, &quad).is_err());
        assert!(asymptotic_times(&packet, &delta_barrier(), -1.0, &u, &quad).is_err());
        let rect = BarrierModel::Rectangular {
            height: 2.0,
            width: 5.0,
        };
        assert!(asymptotic_times(&packet, &rect, 4.0, &u, &quad).is_err());
    }
}

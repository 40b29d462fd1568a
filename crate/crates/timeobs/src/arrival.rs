//! Weak arrival-time operator, its momentum-space matrix elements, and the
//! classical comparison.
//!
//! The arrival operator averages the directed probability flux through a
//! point X over a resolution window of length dt.  Its momentum-space
//! matrix elements have a closed form built from the complex error
//! function; their diagonal reproduces the classical flux p/M exactly, and
//! the difference of the two direction projections reduces to the
//! probability-current kernel as the window shrinks.  The expectation in a
//! packet is in general complex; the real part plays the role of an
//! arrival rate while the imaginary part enters measured readings through
//! the detector coefficient.
//!
//! A classical phase-space model with the same initial beam provides the
//! correspondence target: the positive-momentum flux of a freely streaming
//! ensemble.

use crate::error::{Result, TimeObsError};
use crate::numerics::{erfc_complex, integrate, integrate_real, sqrt_pi, QuadratureSpec};
use crate::scattering::UnitsConvention;
use crate::time_densities::EnergyQuadrature;
use crate::wavepacket::GaussianPacket;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

/// Relative size of the off-diagonal expansion parameter below which the
/// matrix elements switch to their series form.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Arrival point and resolution window.
#[derive(Debug, Clone, Copy)]
pub struct ArrivalConfig {
    /// Arrival point X.
    pub x: f64,
    /// Resolution window length dt.
    pub dt: f64,
}

impl ArrivalConfig {
    /// Validated configuration; the window must be positive.
    pub fn new(x: f64, dt: f64) -> Result<Self> {
        if x.is_finite() && dt.is_finite() && dt > 0.0 {
            Ok(ArrivalConfig { x, dt })
        } else {
            Err(TimeObsError::Domain(format!(
                "arrival configuration requires finite x and dt > 0, got x={x}, dt={dt}"
            )))
        }
    }
}

/// Direction of the flux projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalDirection {
    /// Arrivals moving towards positive x.
    Positive,
    /// Arrivals moving towards negative x.
    Negative,
}

/// The complex scale c = exp(i pi/4) sqrt(dt / (2 hbar M)) entering every
/// error-function argument.
fn window_scale(dt: f64, units: &UnitsConvention) -> Complex64 {
    Complex64::from_polar((dt / (2.0 * units.hbar * units.mass)).sqrt(), FRAC_PI_4)
}

/// Momentum-space matrix element of the direction-projected arrival
/// operator.
///
/// Off the diagonal the closed form divides an error-function difference
/// by the momentum transfer; inside a small diagonal strip the quotient is
/// replaced by its second-order expansion, which is continuous across the
/// switch and exact on the diagonal.
pub fn pi_matrix_element(
    p1: f64,
    p2: f64,
    cfg: &ArrivalConfig,
    direction: ArrivalDirection,
    units: &UnitsConvention,
) -> Result<Complex64> {
    if !(p1.is_finite() && p2.is_finite()) {
        return Err(TimeObsError::Domain(format!(
            "momenta must be finite, got p1={p1}, p2={p2}"
        )));
    }
    let hbar = units.hbar;
    let i = Complex64::i();
    let c = window_scale(cfg.dt, units);
    let eps = p2 - p1;
    let p_mid = 0.5 * (p1 + p2);
    let a = p_mid * cfg.dt / (units.mass * hbar);
    let phase = (i * eps * cfg.x / hbar).exp();
    let sign = match direction {
        ArrivalDirection::Positive => 1.0,
        ArrivalDirection::Negative => -1.0,
    };

    let small = eps.abs() * (a.abs() + c.norm() + p_mid.abs() * c.norm_sqr());
    if small < SERIES_THRESHOLD {
        let e0 = erfc_complex(-sign * p_mid * c)?;
        let w0 = (-(p_mid * c) * (p_mid * c)).exp();
        let g1 = -i * a * e0 - sign * c * (2.0 / sqrt_pi()) * w0;
        let g2 = -a * a * e0 + sign * i * c * (2.0 * a / sqrt_pi()) * w0;
        Ok(sign * i * hbar / (2.0 * cfg.dt) * phase * (g1 + 0.5 * eps * g2))
    } else {
        let first = erfc_complex(-sign * p1 * c)?;
        let second = erfc_complex(-sign * p2 * c)?;
        let decay = (-i * a * eps).exp();
        Ok(sign * i * hbar / (2.0 * cfg.dt * eps) * phase * (decay * first - second))
    }
}

/// Shortest window the packet can resolve, hbar over its mean kinetic
/// energy.
pub fn resolution_bound(packet: &GaussianPacket, units: &UnitsConvention) -> f64 {
    units.hbar / packet.mean_energy(units)
}

/// Complex arrival expectation of a packet.
#[derive(Debug, Clone, Copy)]
pub struct ComplexArrival {
    /// Real part of the window-averaged directed flux.
    pub pi1: f64,
    /// Imaginary part, entering readings via the detector coefficient.
    pub pi2: f64,
    /// True when the window is shorter than the packet's resolution bound
    /// hbar / E_kin, where the operator's reading is dominated by window
    /// diffraction rather than the flux.
    pub resolution_warning: bool,
}

impl ComplexArrival {
    /// Probability read off a weak measurement of arrival inside the
    /// window: dt (pi1 - (2/hbar) c_det pi2) with c_det the detector
    /// coefficient.
    pub fn weak_window_probability(&self, dt: f64, c_det: f64, hbar: f64) -> f64 {
        dt * (self.pi1 - 2.0 / hbar * c_det * self.pi2)
    }
}

/// Expectation (1/2 pi hbar) Int dp1 dp2 conj(phi(p1)) K(p1,p2) phi(p2)
/// of a momentum-space kernel in the packet's momentum wavefunction.
fn kernel_expectation<K>(
    packet: &GaussianPacket,
    kernel: K,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
    initial_panels: usize,
) -> Result<Complex64>
where
    K: Fn(f64, f64) -> Result<Complex64>,
{
    let p_lo = packet.p_mean - 8.0 * packet.sigma;
    let p_hi = packet.p_mean + 8.0 * packet.sigma;
    let norm_spec = QuadratureSpec::new(p_lo, p_hi)
        .with_rel_tol(1e-12)
        .with_initial_panels(8);
    let norm = integrate_real(
        |p| {
            let env = packet.momentum_envelope(p);
            Ok(env * env)
        },
        &norm_spec,
    )?;
    if (norm - 1.0).abs() > 1e-6 {
        return Err(TimeObsError::Domain(format!(
            "packet momentum wavefunction is not unit-normalized over its \
             window: integral {norm}"
        )));
    }

    let outer_spec = QuadratureSpec::new(p_lo, p_hi)
        .with_rel_tol(quad.rel_tol)
        .with_abs_tol(1e-12)
        .with_initial_panels(initial_panels)
        .with_max_panels(quad.max_panels);
    let inner_spec = QuadratureSpec::new(p_lo, p_hi)
        .with_rel_tol(quad.rel_tol * 0.1)
        .with_abs_tol(1e-13)
        .with_initial_panels(initial_panels)
        .with_max_panels(quad.max_panels);

    let value = integrate(
        |p1| {
            let bra = packet.momentum_wavefunction(p1, units).conj();
            if bra.norm() < 1e-300 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let inner = integrate(
                |p2| Ok(kernel(p1, p2)? * packet.momentum_wavefunction(p2, units)),
                &inner_spec,
            )?;
            Ok(bra * inner)
        },
        &outer_spec,
    )?;
    Ok(value / (2.0 * PI * units.hbar))
}

fn arrival_panels(packet: &GaussianPacket, cfg: &ArrivalConfig, units: &UnitsConvention) -> usize {
    let a = packet.p_mean.abs() * cfg.dt / (units.mass * units.hbar);
    let span = 16.0 * packet.sigma;
    ((cfg.x.abs() / units.hbar + a) * span / 3.0).ceil() as usize + 1
}

/// Window-averaged directed arrival expectation of the packet at the
/// configured point.
pub fn arrival_distribution(
    packet: &GaussianPacket,
    cfg: &ArrivalConfig,
    direction: ArrivalDirection,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<ComplexArrival> {
    let value = kernel_expectation(
        packet,
        |p1, p2| pi_matrix_element(p1, p2, cfg, direction, units),
        units,
        quad,
        arrival_panels(packet, cfg, units),
    )?;
    Ok(ComplexArrival {
        pi1: value.re,
        pi2: value.im,
        resolution_warning: cfg.dt < resolution_bound(packet, units),
    })
}

/// Expectation of the instantaneous probability current at x, from the
/// flux kernel (p1 + p2) / 2M with the same nested quadrature as the
/// arrival expectation.
pub fn flux_expectation(
    packet: &GaussianPacket,
    x: f64,
    units: &UnitsConvention,
    quad: &EnergyQuadrature,
) -> Result<Complex64> {
    if !x.is_finite() {
        return Err(TimeObsError::Domain(format!(
            "flux position must be finite, got {x}"
        )));
    }
    let i = Complex64::i();
    let panels = (x.abs() / units.hbar * 16.0 * packet.sigma / 3.0).ceil() as usize + 1;
    kernel_expectation(
        packet,
        |p1, p2| Ok((p1 + p2) / (2.0 * units.mass) * (i * (p2 - p1) * x / units.hbar).exp()),
        units,
        quad,
        panels,
    )
}

/// Classical phase-space ensemble of free particles.
pub struct PhaseSpaceDensity {
    density: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    /// Particle mass.
    pub mass: f64,
    /// Momentum support used by flux integrals.
    pub p_range: (f64, f64),
}

impl PhaseSpaceDensity {
    /// Ensemble from an explicit density function of (x, p, t).
    pub fn new<F>(mass: f64, p_range: (f64, f64), density: F) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(mass.is_finite() && mass > 0.0)
            || !(p_range.0.is_finite() && p_range.1.is_finite() && p_range.0 < p_range.1)
        {
            return Err(TimeObsError::Domain(format!(
                "phase-space density requires mass > 0 and an increasing \
                 momentum range, got mass={mass}, range={p_range:?}"
            )));
        }
        Ok(PhaseSpaceDensity {
            density: Box::new(density),
            mass,
            p_range,
        })
    }

    /// Freely streaming beam with independent Gaussian position and
    /// momentum marginals at t = 0.
    pub fn gaussian_beam(
        x_mean: f64,
        sigma_x: f64,
        p_mean: f64,
        sigma_p: f64,
        mass: f64,
    ) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0 && sigma_p.is_finite() && sigma_p > 0.0) {
            return Err(TimeObsError::Domain(format!(
                "gaussian beam requires positive widths, got sigma_x={sigma_x}, \
                 sigma_p={sigma_p}"
            )));
        }
        let range = (p_mean - 10.0 * sigma_p, p_mean + 10.0 * sigma_p);
        Self::new(mass, range, move |x, p, t| {
            gauss_pdf(x - p * t / mass, x_mean, sigma_x) * gauss_pdf(p, p_mean, sigma_p)
        })
    }

    /// Beam whose phase-space marginals match the packet's Wigner
    /// function: position width hbar / (2 sigma) and momentum width sigma
    /// around the packet center.
    pub fn wigner_matched(packet: &GaussianPacket, units: &UnitsConvention) -> Result<Self> {
        Self::gaussian_beam(
            packet.x0,
            packet.spatial_width(units),
            packet.p_mean,
            packet.sigma,
            units.mass,
        )
    }

    /// Density value at phase-space point (x, p) and time t.
    pub fn evaluate(&self, x: f64, p: f64, t: f64) -> f64 {
        (self.density)(x, p, t)
    }
}

fn gauss_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Classical positive-direction arrival flux at point x and time t,
/// the integral of (p/M) times the density over positive momenta.
pub fn classical_arrival_flux(
    density: &PhaseSpaceDensity,
    x: f64,
    t: f64,
    quad: &EnergyQuadrature,
) -> Result<f64> {
    if !(x.is_finite() && t.is_finite()) {
        return Err(TimeObsError::Domain(format!(
            "classical flux requires finite x and t, got x={x}, t={t}"
        )));
    }
    let lo = density.p_range.0.max(0.0);
    let hi = density.p_range.1;
    if hi <= lo {
        return Ok(0.0);
    }
    let spec = QuadratureSpec::new(lo, hi)
        .with_rel_tol(quad.rel_tol)
        .with_abs_tol(1e-12)
        .with_initial_panels(32)
        .with_max_panels(quad.max_panels);
    integrate_real(|p| Ok(p / density.mass * density.evaluate(x, p, t)), &spec)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn units() -> UnitsConvention {
        UnitsConvention::default()
    }

    fn assert_close(got: Complex64, want: Complex64, tol: f64) {
        assert!(
            (got - want).norm() <= tol * want.norm().max(1.0),
            "got {got}, want {want}"
        );
    }

    #[test]
    fn matrix_elements_match_reference_values() {
        let u = units();
        let cfg = ArrivalConfig::new(0.0, 1.0).unwrap();
        let m = pi_matrix_element(1.0, 1.3, &cfg, ArrivalDirection::Positive, &u).unwrap();
        assert_close(
            m,
            Complex64::new(1.0185287662314236511, -0.29731720461892287461),
            1e-13,
        );
        let m = pi_matrix_element(-0.7, 0.4, &cfg, ArrivalDirection::Positive, &u).unwrap();
        assert_close(
            m,
            Complex64::new(0.2184442856890461614, -0.2749266315946101224),
            1e-13,
        );
        let d = pi_matrix_element(1.0, 1.0, &cfg, ArrivalDirection::Positive, &u).unwrap();
        assert_close(
            d,
            Complex64::new(0.93362448000462946133, -0.15386422032688713492),
            1e-13,
        );

        // For windows much longer than hbar/E the diagonal approaches the
        // classical flux on the co-moving side and fades on the other.
        let p = 72.0f64.sqrt();
        let d = pi_matrix_element(p, p, &cfg, ArrivalDirection::Positive, &u).unwrap();
        assert_close(
            d,
            Complex64::new(8.4897960453674889264, -0.0031931505741619796646),
            1e-12,
        );
        let rel = (d - p).norm() / p;
        assert!((rel / 6.5169e-4 - 1.0).abs() < 1e-3, "rel {rel}");
        let d = pi_matrix_element(-p, -p, &cfg, ArrivalDirection::Positive, &u).unwrap();
        assert!(d.norm() / p <= 1e-3, "leak {}", d.norm() / p);
    }

    #[test]
    fn mirrored_momenta_swap_the_directions() {
        let u = units();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p1 = rng.gen_range(-3.0..3.0);
            let p2 = rng.gen_range(-3.0..3.0);
            let x = rng.gen_range(-2.0..2.0);
            let dt = rng.gen_range(0.1..3.0);
            let cfg = ArrivalConfig::new(x, dt).unwrap();
            let mirrored = ArrivalConfig::new(-x, dt).unwrap();
            let plus =
                pi_matrix_element(-p1, -p2, &mirrored, ArrivalDirection::Positive, &u).unwrap();
            let minus = pi_matrix_element(p1, p2, &cfg, ArrivalDirection::Negative, &u).unwrap();
            assert_close(plus, minus, 1e-12);
        }
    }

    #[test]
    fn series_branch_joins_the_full_expression() {
        let u = units();
        let cfg = ArrivalConfig::new(0.4, 0.7).unwrap();
        let c = window_scale(cfg.dt, &u);
        for p_mid in [1.3, -0.8] {
            let a: f64 = p_mid * cfg.dt / (u.mass * u.hbar);
            let scale = a.abs() + c.norm() + p_mid.abs() * c.norm_sqr();
            for direction in [ArrivalDirection::Positive, ArrivalDirection::Negative] {
                let at = |eps: f64| {
                    pi_matrix_element(p_mid - 0.5 * eps, p_mid + 0.5 * eps, &cfg, direction, &u)
                        .unwrap()
                };
                let below = at(0.98 * SERIES_THRESHOLD / scale);
                let above = at(1.02 * SERIES_THRESHOLD / scale);
                assert!(
                    (below - above).norm() <= 1e-7 * below.norm(),
                    "{direction:?} at p={p_mid}: {below} vs {above}"
                );
            }
        }
    }

    #[test]
    fn diagonal_difference_is_the_classical_flux() {
        let u = units();
        for dt in [0.3, 1.0, 7.0] {
            let cfg = ArrivalConfig::new(0.9, dt).unwrap();
            for p in [-2.7, -0.4, 0.3, 1.0, 72.0f64.sqrt()] {
                let plus = pi_matrix_element(p, p, &cfg, ArrivalDirection::Positive, &u).unwrap();
                let minus = pi_matrix_element(p, p, &cfg, ArrivalDirection::Negative, &u).unwrap();
                let flux = plus - minus;
                assert!(
                    (flux - p / u.mass).norm() <= 1e-13 * p.abs().max(1.0),
                    "p={p}, dt={dt}: {flux}"
                );
            }
        }
    }

    #[test]
    fn short_window_diagonal_grows_like_the_inverse_square_root() {
        let u = units();
        let windows = [1e-4, 1e-3, 1e-2];
        let mags: Vec<f64> = windows
            .iter()
            .map(|&dt| {
                let cfg = ArrivalConfig::new(0.0, dt).unwrap();
                pi_matrix_element(1.0, 1.0, &cfg, ArrivalDirection::Positive, &u)
                    .unwrap()
                    .norm()
            })
            .collect();
        assert!((mags[0] / 40.249352 - 1.0).abs() < 1e-6, "got {}", mags[0]);
        let xs: Vec<f64> = windows.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 3.0;
        let ym = ys.iter().sum::<f64>() / 3.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn direction_difference_reduces_to_the_current_for_short_windows() {
        let u = units();
        let packet = GaussianPacket::with_start(2.0, 0.01, -10.0).unwrap();
        let quad = EnergyQuadrature::default();
        let dt = 1e-4 * u.mass * u.hbar / (packet.p_mean * packet.p_mean);
        let cfg = ArrivalConfig::new(0.0, dt).unwrap();
        let plus =
            arrival_distribution(&packet, &cfg, ArrivalDirection::Positive, &u, &quad).unwrap();
        let minus =
            arrival_distribution(&packet, &cfg, ArrivalDirection::Negative, &u, &quad).unwrap();
        assert!(plus.resolution_warning);
        let flux = flux_expectation(&packet, 0.0, &u, &quad).unwrap();
        let got = Complex64::new(plus.pi1 - minus.pi1, plus.pi2 - minus.pi2);
        assert!(
            (got - flux).norm() <= 1e-3 * flux.norm(),
            "difference {got} vs current {flux}"
        );
    }

    #[test]
    fn quasiclassical_packet_reproduces_the_classical_flux() {
        let u = units();
        let packet = GaussianPacket::with_start(2.0, 0.01, -10.0).unwrap();
        let quad = EnergyQuadrature::default();
        let cfg = ArrivalConfig::new(0.0, 20.0).unwrap();
        let arrival =
            arrival_distribution(&packet, &cfg, ArrivalDirection::Positive, &u, &quad).unwrap();
        assert!(!arrival.resolution_warning);
        let beam = PhaseSpaceDensity::wigner_matched(&packet, &u).unwrap();
        let classical = classical_arrival_flux(&beam, cfg.x, 0.5 * cfg.dt, &quad).unwrap();
        assert!(
            (arrival.pi1 - classical).abs() <= 0.05 * classical,
            "quantum {} vs classical {classical}",
            arrival.pi1
        );
        assert!(arrival.pi2.abs() <= 0.05 * arrival.pi1);
        // The weak window reading shifts linearly with the detector
        // coefficient.
        let base = arrival.weak_window_probability(cfg.dt, 0.0, u.hbar);
        let shifted = arrival.weak_window_probability(cfg.dt, 0.3, u.hbar);
        assert!((base - cfg.dt * arrival.pi1).abs() < 1e-15);
        assert!((shifted - base + cfg.dt * 2.0 / u.hbar * 0.3 * arrival.pi2).abs() < 1e-15);
    }

    #[test]
    fn classical_flux_matches_the_gaussian_closed_form() {
        let quad = EnergyQuadrature::default();
        let (x_mean, sigma_x, p_mean, sigma_p, mass) = (-20.0, 2.0, 1.0, 0.05, 1.0);
        let beam =
            PhaseSpaceDensity::gaussian_beam(x_mean, sigma_x, p_mean, sigma_p, mass).unwrap();

        let phi = |z: f64| {
            0.5 * erfc_complex(Complex64::new(-z / 2f64.sqrt(), 0.0))
                .unwrap()
                .re
        };
        let closed = |x: f64, t: f64| {
            let sigma_c = 1.0
                / (t * t / (mass * mass * sigma_x * sigma_x) + 1.0 / (sigma_p * sigma_p)).sqrt();
            let spread = (sigma_x * sigma_x + sigma_p * sigma_p * t * t / (mass * mass)).sqrt();
            let p_c = sigma_c
                * sigma_c
                * ((x - x_mean) * t / (mass * sigma_x * sigma_x) + p_mean / (sigma_p * sigma_p));
            gauss_pdf(x - x_mean - p_mean * t / mass, 0.0, spread)
                * (p_c * phi(p_c / sigma_c) + sigma_c * sigma_c * gauss_pdf(0.0, p_c, sigma_c))
                / mass
        };

        for (x, t) in [
            (0.0, 0.0),
            (-20.0, 0.0),
            (0.0, 15.0),
            (-1.0, 19.0),
            (3.0, 30.0),
        ] {
            let got = classical_arrival_flux(&beam, x, t, &quad).unwrap();
            let want = closed(x, t);
            assert!(
                (got - want).abs() <= 1e-8 * want.abs().max(1e-12),
                "x={x}, t={t}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn every_classical_particle_arrives_exactly_once() {
        let quad = EnergyQuadrature::default();
        let beam = PhaseSpaceDensity::gaussian_beam(-20.0, 2.0, 1.0, 0.05, 1.0).unwrap();
        let spec = QuadratureSpec::new(0.0, 40.0)
            .with_rel_tol(1e-9)
            .with_initial_panels(32);
        let total =
            integrate_real(|t| classical_arrival_flux(&beam, 0.0, t, &quad), &spec).unwrap();
        assert!((total - 1.0).abs() < 1e-3, "total {total}");
    }

    #[test]
    fn input_validation() {
        let u = units();
        assert!(ArrivalConfig::new(0.0, 0.0).is_err());
        assert!(ArrivalConfig::new(f64::NAN, 1.0).is_err());
        let cfg = ArrivalConfig::new(0.0, 1.0).unwrap();
        assert!(
            pi_matrix_element(f64::INFINITY, 1.0, &cfg, ArrivalDirection::Positive, &u).is_err()
        );
        assert!(PhaseSpaceDensity::gaussian_beam(0.0, -1.0, 1.0, 0.1, 1.0).is_err());
        assert!(PhaseSpaceDensity::new(0.0, (0.0, 1.0), |_, _, _| 0.0).is_err());
        let packet = GaussianPacket::new(2.0, 0.01).unwrap();
        assert!((resolution_bound(&packet, &u) - 0.5).abs() < 1e-15);
    }
}

//! Stationary scattering states for free, delta, and rectangular barriers.
//!
//! Barriers are supported on [0, L] (a point at the origin for the delta
//! barrier).  For each energy E > 0 there are two energy-normalized
//! eigenfunctions: one incident from the left and one from the right, both
//! normalized so that overlaps approach delta(E - E') as the quantization
//! box grows.

use crate::error::{Result, TimeObsError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Values of hbar and the particle mass defining the unit system.
#[derive(Debug, Clone, Copy)]
pub struct UnitsConvention {
    /// Reduced Planck constant.
    pub hbar: f64,
    /// Particle mass.
    pub mass: f64,
}

impl UnitsConvention {
    /// Units with the given hbar and mass, both strictly positive.
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if hbar.is_finite() && hbar > 0.0 && mass.is_finite() && mass > 0.0 {
            Ok(UnitsConvention { hbar, mass })
        } else {
            Err(TimeObsError::Domain(format!(
                "units require positive finite hbar and mass, got hbar={hbar}, mass={mass}"
            )))
        }
    }
}

impl Default for UnitsConvention {
    /// Natural units hbar = mass = 1.
    fn default() -> Self {
        UnitsConvention {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

/// One-dimensional barrier at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierModel {
    /// No potential.
    Free,
    /// Delta barrier `strength * delta(x)`; strength has units of
    /// energy times length.
    Delta {
        /// Integrated potential strength.
        strength: f64,
    },
    /// Rectangular barrier of the given height on [0, width].
    Rectangular {
        /// Barrier height (an energy).
        height: f64,
        /// Barrier width (a length).
        width: f64,
    },
}

impl BarrierModel {
    /// Checks the parameters are physical.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BarrierModel::Free => true,
            BarrierModel::Delta { strength } => strength.is_finite() && strength > 0.0,
            BarrierModel::Rectangular { height, width } => {
                height.is_finite() && height > 0.0 && width.is_finite() && width > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(TimeObsError::Domain(format!(
                "barrier parameters must be positive and finite: {self:?}"
            )))
        }
    }

    /// Width L of the support [0, L]; zero for the free and delta cases.
    pub fn support_width(&self) -> f64 {
        match *self {
            BarrierModel::Rectangular { width, .. } => width,
            _ => 0.0,
        }
    }
}

/// Side the incoming plane wave arrives from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    /// Wave travelling to the right, incident from x < 0.
    FromLeft,
    /// Wave travelling to the left, incident from x > L.
    FromRight,
}

/// Transmission and reflection amplitudes at a fixed energy for a wave
/// incident from the left.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringAmplitudes {
    /// Transmission amplitude.
    pub t: Complex64,
    /// Reflection amplitude for left incidence.
    pub r: Complex64,
    /// Energy the amplitudes belong to.
    pub energy: f64,
}

impl ScatteringAmplitudes {
    /// Transmission probability |t|^2.
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Reflection probability |r|^2.
    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// Reflection amplitude for a wave incident from the right,
    /// -t conj(r) / conj(t), fixed by unitarity of the scattering matrix.
    pub fn reflection_from_right(&self) -> Complex64 {
        -self.t * self.r.conj() / self.t.conj()
    }
}

/// Momentum sqrt(2 M E) of a free particle with energy E > 0.
pub fn momentum_from_energy(e: f64, units: &UnitsConvention) -> Result<f64> {
    if e.is_finite() && e > 0.0 {
        Ok((2.0 * units.mass * e).sqrt())
    } else {
        Err(TimeObsError::Domain(format!(
            "energy must be positive and finite, got {e}"
        )))
    }
}

/// sinh(z)/z, continued through z = 0 by its Taylor series.
pub(crate) fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-2 {
        let z2 = z * z;
        1.0 + z2 * (1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 / 5040.0))
    } else {
        z.sinh() / z
    }
}

/// Largest allowed opacity kappa * L of a rectangular barrier; beyond this
/// the interior hyperbolic functions overflow f64.
const MAX_OPACITY: f64 = 350.0;

/// Transmission and reflection amplitudes at energy E.
pub fn amplitudes(
    barrier: &BarrierModel,
    e: f64,
    units: &UnitsConvention,
) -> Result<ScatteringAmplitudes> {
    barrier.validate()?;
    let p = momentum_from_energy(e, units)?;
    let k = p / units.hbar;
    let (t, r) = match *barrier {
        BarrierModel::Free => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        BarrierModel::Delta { strength } => {
            let t = p / Complex64::new(p, units.mass * strength / units.hbar);
            (t, t - 1.0)
        }
        BarrierModel::Rectangular { height, width } => {
            let kappa_sq = 2.0 * units.mass * (height - e) / (units.hbar * units.hbar);
            let kappa = Complex64::new(kappa_sq, 0.0).sqrt();
            if kappa.re * width > MAX_OPACITY {
                return Err(TimeObsError::Overflow(format!(
                    "opaque rectangular barrier: kappa * L = {} exceeds {MAX_OPACITY}",
                    kappa.re * width
                )));
            }
            let shc = sinhc(kappa * width);
            let k_sq = k * k;
            let d = (kappa * width).cosh()
                + Complex64::new(0.0, (kappa_sq - k_sq) / (2.0 * k) * width) * shc;
            let t = Complex64::new(0.0, -k * width).exp() / d;
            let r = Complex64::new(0.0, -(kappa_sq + k_sq) / (2.0 * k) * width) * shc / d;
            (t, r)
        }
    };
    Ok(ScatteringAmplitudes { t, r, energy: e })
}

/// Energy-normalization prefactor sqrt(M / (2 pi hbar p)).
pub(crate) fn norm_const(p: f64, units: &UnitsConvention) -> f64 {
    (units.mass / (2.0 * PI * units.hbar * p)).sqrt()
}

/// Energy-normalized scattering eigenfunction at position x.
///
/// For left incidence the function is the incoming plane wave plus the
/// reflected wave on x < 0 and the transmitted wave on x > L; for right
/// incidence the roles are mirrored, with the right-incidence reflection
/// amplitude fixed by unitarity.  Inside a rectangular barrier the exact
/// hyperbolic interior solution is used; on the delta barrier's point
/// support the continuous limit is returned.
pub fn eigenfunction(
    barrier: &BarrierModel,
    e: f64,
    incidence: Incidence,
    x: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    let amps = amplitudes(barrier, e, units)?;
    eigenfunction_with(barrier, &amps, incidence, x, units)
}

/// [`eigenfunction`] reusing precomputed amplitudes, for use inside
/// energy-integral inner loops.
pub(crate) fn eigenfunction_with(
    barrier: &BarrierModel,
    amps: &ScatteringAmplitudes,
    incidence: Incidence,
    x: f64,
    units: &UnitsConvention,
) -> Result<Complex64> {
    if !x.is_finite() {
        return Err(TimeObsError::Domain(format!(
            "eigenfunction position must be finite, got {x}"
        )));
    }
    let p = momentum_from_energy(amps.energy, units)?;
    let k = p / units.hbar;
    let c = norm_const(p, units);
    let t = amps.t;
    let r = amps.r;
    let l = barrier.support_width();
    let phase = |arg: f64| Complex64::new(0.0, arg).exp();

    let value = match incidence {
        Incidence::FromLeft => {
            if x < 0.0 {
                phase(k * x) + r * phase(-k * x)
            } else if x > l {
                t * phase(k * x)
            } else {
                match *barrier {
                    BarrierModel::Free => phase(k * x),
                    BarrierModel::Delta { .. } => t,
                    BarrierModel::Rectangular { height, .. } => {
                        let kappa_sq =
                            2.0 * units.mass * (height - amps.energy) / (units.hbar * units.hbar);
                        let kappa = Complex64::new(kappa_sq, 0.0).sqrt();
                        let arg = kappa * (x - l);
                        t * phase(k * l)
                            * (arg.cosh() + Complex64::new(0.0, k * (x - l)) * sinhc(arg))
                    }
                }
            }
        }
        Incidence::FromRight => {
            if x > l {
                phase(-k * x) + amps.reflection_from_right() * phase(k * x)
            } else if x < 0.0 {
                t * phase(-k * x)
            } else {
                match *barrier {
                    BarrierModel::Free => phase(-k * x),
                    BarrierModel::Delta { .. } => t,
                    BarrierModel::Rectangular { height, .. } => {
                        let kappa_sq =
                            2.0 * units.mass * (height - amps.energy) / (units.hbar * units.hbar);
                        let kappa = Complex64::new(kappa_sq, 0.0).sqrt();
                        let arg = kappa * x;
                        t * (arg.cosh() - Complex64::new(0.0, k * x) * sinhc(arg))
                    }
                }
            }
        }
    };
    let out = c * value;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(TimeObsError::Overflow(format!(
            "eigenfunction overflowed at x = {x}, E = {}",
            amps.energy
        )))
    }
}

//! Closed-form dwell and conditional times for a Rabi-driven two-level
//! system.
//!
//! The system starts in the lower level |0> of a splitting hbar*omega and is
//! driven by an off-diagonal coupling of magnitude |v|, giving the Rabi
//! frequency Omega = sqrt(omega^2 + 4 |v|^2 / hbar^2).  The dwell time
//! tau(chi, t) is the mean time spent in level chi up to t; conditioning on
//! finding the system in a final level f at t splits each dwell time into a
//! real part and an imaginary part, the latter entering measured values
//! through a detector-dependent coefficient.

use crate::error::{Result, TimeObsError};
use num_complex::Complex64;

/// Tolerance on Omega * t (radians) for declaring the final-level-1
/// conditional times singular at the Rabi revivals.
const SINGULAR_TOL: f64 = 1e-6;

/// Level index of the two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Lower level, the initial state.
    Zero,
    /// Upper level.
    One,
}

/// Two-level system parameters.
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelConfig {
    omega: f64,
    coupling: f64,
    hbar: f64,
    rabi: f64,
}

impl TwoLevelConfig {
    /// Configuration from the level splitting omega, the complex coupling
    /// v, and hbar.  Only |v| enters any closed form, so the phase of v is
    /// accepted and ignored.  A fully degenerate system (omega = v = 0)
    /// is rejected.
    pub fn new(omega: f64, coupling: Complex64, hbar: f64) -> Result<Self> {
        if !(omega.is_finite() && coupling.is_finite() && hbar.is_finite() && hbar > 0.0) {
            return Err(TimeObsError::Domain(format!(
                "two-level parameters must be finite with hbar > 0; got \
                 omega={omega}, coupling={coupling}, hbar={hbar}"
            )));
        }
        let v = coupling.norm();
        let rabi = (omega * omega + 4.0 * v * v / (hbar * hbar)).sqrt();
        if rabi == 0.0 {
            return Err(TimeObsError::Domain(
                "degenerate two-level system: omega and coupling are both zero".into(),
            ));
        }
        Ok(TwoLevelConfig {
            omega,
            coupling: v,
            hbar,
            rabi,
        })
    }

    /// Level splitting omega.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Coupling magnitude |v|.
    pub fn coupling_strength(&self) -> f64 {
        self.coupling
    }

    /// Rabi frequency Omega.
    pub fn rabi_frequency(&self) -> f64 {
        self.rabi
    }

    /// hbar of the unit system.
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// omega^2 / Omega^2, the weight of the non-oscillating part.
    fn asymmetry(&self) -> f64 {
        (self.omega / self.rabi) * (self.omega / self.rabi)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(TimeObsError::Domain(format!(
                "evolution time must be non-negative and finite, got {t}"
            )))
        }
    }
}

/// Occupation probabilities (P0, P1) at time t, starting from level 0.
pub fn occupation_probabilities(cfg: &TwoLevelConfig, t: f64) -> Result<(f64, f64)> {
    cfg.check_time(t)?;
    let a = cfg.asymmetry();
    let s = (0.5 * cfg.rabi * t).sin();
    let c = (0.5 * cfg.rabi * t).cos();
    let p1 = (1.0 - a) * s * s;
    let p0 = c * c + a * s * s;
    Ok((p0, p1))
}

/// Unconditional dwell times (tau(0, t), tau(1, t)); they add up to t.
pub fn dwell_times(cfg: &TwoLevelConfig, t: f64) -> Result<(f64, f64)> {
    cfg.check_time(t)?;
    let a = cfg.asymmetry();
    let osc = (1.0 - a) * (cfg.rabi * t).sin() / (2.0 * cfg.rabi);
    let tau0 = 0.5 * (1.0 + a) * t + osc;
    let tau1 = 0.5 * (1.0 - a) * t - osc;
    Ok((tau0, tau1))
}

/// Real and imaginary conditional-time components at a fixed final level,
/// for the dwell observable of each level.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalTimes {
    /// Real component of the conditional dwell time in level 0.
    pub real_level0: f64,
    /// Imaginary component of the conditional dwell time in level 0.
    pub imag_level0: f64,
    /// Real component of the conditional dwell time in level 1.
    pub real_level1: f64,
    /// Imaginary component of the conditional dwell time in level 1.
    pub imag_level1: f64,
}

/// Conditional dwell-time components given the system is found in
/// `final_level` at time t.
///
/// Conditioning on level 1 is singular whenever Omega * t is a multiple of
/// 2 pi (the occupation of level 1 vanishes quadratically there); the error
/// carries that divergence order.  Conditioning on level 0 is singular only
/// in the omega = 0 case at odd multiples of pi.
pub fn conditional_components(
    cfg: &TwoLevelConfig,
    t: f64,
    final_level: Level,
) -> Result<ConditionalTimes> {
    cfg.check_time(t)?;
    let omega = cfg.omega;
    let big = cfg.rabi;
    let a = cfg.asymmetry();
    let theta = big * t;
    let half = 0.5 * theta;
    let (p0, p1) = occupation_probabilities(cfg, t)?;

    match final_level {
        Level::One => {
            let revolutions = (theta / (2.0 * std::f64::consts::PI)).round();
            let dist = theta - 2.0 * std::f64::consts::PI * revolutions;
            if dist.abs() < SINGULAR_TOL || p1 == 0.0 {
                return Err(TimeObsError::Singular {
                    order: 2,
                    message: format!(
                        "conditioning on level 1 at Omega*t = {theta} (distance \
                         {dist:.3e} from a revival) where its occupation vanishes"
                    ),
                });
            }
            let imag0 = omega / (2.0 * big) * (2.0 / big - t * half.cos() / half.sin());
            Ok(ConditionalTimes {
                real_level0: 0.5 * t,
                imag_level0: imag0,
                real_level1: 0.5 * t,
                imag_level1: -imag0,
            })
        }
        Level::Zero => {
            if p0 < 1e-12 {
                return Err(TimeObsError::Singular {
                    order: 2,
                    message: format!(
                        "conditioning on level 0 at Omega*t = {theta} where its \
                         occupation vanishes (omega = 0 resonance)"
                    ),
                });
            }
            let s = theta.sin();
            let c = theta.cos();
            let real0 = ((1.0 + 3.0 * a) * t + (1.0 - a) * (2.0 / big * s + t * c)) / (4.0 * p0);
            let real1 = (1.0 - a) * (t + t * c - 2.0 / big * s) / (4.0 * p0);
            let imag0 =
                omega / big * (1.0 - a) * half.sin() * (t * half.cos() - 2.0 / big * half.sin())
                    / (2.0 * p0);
            Ok(ConditionalTimes {
                real_level0: real0,
                imag_level0: imag0,
                real_level1: real1,
                imag_level1: -imag0,
            })
        }
    }
}

/// One output row of the reference curves over a time grid.
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelRow {
    /// Evolution time.
    pub t: f64,
    /// Unconditional dwell time in level 0.
    pub dwell0: f64,
    /// Unconditional dwell time in level 1.
    pub dwell1: f64,
    /// Real level-0 dwell component conditioned on ending in level 1.
    pub final1_real_level0: f64,
    /// Real level-0 dwell component conditioned on ending in level 0.
    pub final0_real_level0: f64,
    /// Real level-1 dwell component conditioned on ending in level 0.
    pub final0_real_level1: f64,
    /// Imaginary level-0 dwell component conditioned on ending in level 0.
    pub final0_imag_level0: f64,
    /// True when conditioning on level 1 is singular at this t; the
    /// final-level-1 field is NaN in that case.
    pub singular: bool,
}

/// Dwell and conditional-time curves over a time grid.  Rows at singular
/// revival times carry NaN in the level-1-conditioned column and are
/// flagged instead of failing the whole sweep.
pub fn figures_data(cfg: &TwoLevelConfig, t_grid: &[f64]) -> Result<Vec<TwoLevelRow>> {
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (dwell0, dwell1) = dwell_times(cfg, t)?;
        let final0 = conditional_components(cfg, t, Level::Zero)?;
        let (final1_real_level0, singular) = match conditional_components(cfg, t, Level::One) {
            Ok(c) => (c.real_level0, false),
            Err(TimeObsError::Singular { .. }) => (f64::NAN, true),
            Err(other) => return Err(other),
        };
        rows.push(TwoLevelRow {
            t,
            dwell0,
            dwell1,
            final1_real_level0,
            final0_real_level0: final0.real_level0,
            final0_real_level1: final0.real_level1,
            final0_imag_level0: final0.imag_level0,
            singular,
        });
    }
    Ok(rows)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_real, QuadratureSpec};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn anchor() -> TwoLevelConfig {
        // omega = 2, |v| = sqrt(3), hbar = 1 gives Omega = 4.
        TwoLevelConfig::new(2.0, Complex64::new(3f64.sqrt(), 0.0), 1.0).unwrap()
    }

    fn random_config(rng: &mut ChaCha8Rng) -> TwoLevelConfig {
        let omega = rng.gen_range(-3.0..3.0);
        let v = rng.gen_range(0.01..3.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        TwoLevelConfig::new(omega, Complex64::from_polar(v, phase), 1.0).unwrap()
    }

    #[test]
    fn anchor_dwell_time_matches_reference() {
        let cfg = anchor();
        assert!((cfg.rabi_frequency() - 4.0).abs() < 1e-14);
        let (tau0, _) = dwell_times(&cfg, 0.6).unwrap();
        assert!((tau0 - 0.43832467317667039937).abs() < 1e-14);
    }

    #[test]
    fn coupling_phase_is_ignored() {
        let real = TwoLevelConfig::new(2.0, Complex64::new(3f64.sqrt(), 0.0), 1.0).unwrap();
        let rotated =
            TwoLevelConfig::new(2.0, Complex64::from_polar(3f64.sqrt(), 0.7), 1.0).unwrap();
        let a = dwell_times(&real, 1.3).unwrap();
        let b = dwell_times(&rotated, 1.3).unwrap();
        assert!((a.0 - b.0).abs() <= 1e-14 && (a.1 - b.1).abs() <= 1e-14);
    }

    #[test]
    fn dwell_times_add_up_to_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let cfg = random_config(&mut rng);
            let t = rng.gen_range(0.0..10.0);
            let (tau0, tau1) = dwell_times(&cfg, t).unwrap();
            assert!((tau0 + tau1 - t).abs() <= 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn dwell_time_equals_integrated_occupation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let cfg = random_config(&mut rng);
            let t = rng.gen_range(0.1..6.0);
            let spec = QuadratureSpec::new(0.0, t)
                .with_rel_tol(1e-11)
                .with_initial_panels(8);
            let integral = integrate_real(
                |s| occupation_probabilities(&cfg, s).map(|(p0, _)| p0),
                &spec,
            )
            .unwrap();
            let (tau0, _) = dwell_times(&cfg, t).unwrap();
            assert!(
                (integral - tau0).abs() <= 1e-9 * tau0.max(1e-3),
                "integral {integral}, closed form {tau0}"
            );
        }
    }

    #[test]
    fn conditional_identities_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0usize;
        while checked < 300 {
            let cfg = random_config(&mut rng);
            let t = rng.gen_range(0.0..10.0);
            let theta = cfg.rabi_frequency() * t;
            let dist = (theta / std::f64::consts::TAU).round() * std::f64::consts::TAU - theta;
            if dist.abs() < 1e-3 {
                continue;
            }
            let (p0, p1) = occupation_probabilities(&cfg, t).unwrap();
            if p0 < 1e-6 {
                continue;
            }
            let (tau0, tau1) = dwell_times(&cfg, t).unwrap();
            let f0 = conditional_components(&cfg, t, Level::Zero).unwrap();
            let f1 = conditional_components(&cfg, t, Level::One).unwrap();
            let scale = t.max(1.0);

            // Weighted real components recover the unconditional dwell times.
            let rec0 = p0 * f0.real_level0 + p1 * f1.real_level0;
            let rec1 = p0 * f0.real_level1 + p1 * f1.real_level1;
            assert!(
                (rec0 - tau0).abs() <= 1e-10 * scale,
                "tau0: {rec0} vs {tau0}"
            );
            assert!(
                (rec1 - tau1).abs() <= 1e-10 * scale,
                "tau1: {rec1} vs {tau1}"
            );

            // Weighted imaginary components cancel.
            let im0 = p0 * f0.imag_level0 + p1 * f1.imag_level0;
            let im1 = p0 * f0.imag_level1 + p1 * f1.imag_level1;
            assert!(im0.abs() <= 1e-10 * scale);
            assert!(im1.abs() <= 1e-10 * scale);

            // Summing a conditional time over the two levels gives t for the
            // real part and zero for the imaginary part.
            assert!((f0.real_level0 + f0.real_level1 - t).abs() <= 1e-10 * scale);
            assert!((f1.real_level0 + f1.real_level1 - t).abs() <= 1e-10 * scale);
            assert!((f0.imag_level0 + f0.imag_level1).abs() <= 1e-12 * scale);
            assert!((f1.imag_level0 + f1.imag_level1).abs() <= 1e-12 * scale);

            // Conditioned on level 1, the real component is exactly t/2.
            assert_eq!(f1.real_level0, 0.5 * t);
            checked += 1;
        }
    }

    #[test]
    fn conditional_time_can_be_negative() {
        let cfg = anchor();
        let f0 = conditional_components(&cfg, 0.3, Level::Zero).unwrap();
        assert!(
            f0.real_level1 < 0.0,
            "expected a negative conditional dwell time, got {}",
            f0.real_level1
        );
    }

    #[test]
    fn singular_revivals_are_detected() {
        let cfg = anchor();
        let revival = std::f64::consts::PI / 2.0;
        for t in [revival, revival + 1e-8, 0.0] {
            match conditional_components(&cfg, t, Level::One) {
                Err(TimeObsError::Singular { order, .. }) => assert_eq!(order, 2),
                other => panic!("expected singular error at t={t}, got {other:?}"),
            }
        }
        assert!(conditional_components(&cfg, revival + 1e-3, Level::One).is_ok());
        // Level 0 never empties when omega is nonzero.
        assert!(conditional_components(&cfg, revival, Level::Zero).is_ok());

        // With omega = 0 the initial level empties completely at half
        // revivals and conditioning on it becomes singular.
        let resonant = TwoLevelConfig::new(0.0, Complex64::new(1.0, 0.0), 1.0).unwrap();
        let half_revival = std::f64::consts::PI / resonant.rabi_frequency();
        assert!(matches!(
            conditional_components(&resonant, half_revival, Level::Zero),
            Err(TimeObsError::Singular { .. })
        ));
    }

    #[test]
    fn degenerate_system_is_rejected() {
        assert!(TwoLevelConfig::new(0.0, Complex64::new(0.0, 0.0), 1.0).is_err());
        assert!(TwoLevelConfig::new(1.0, Complex64::new(0.0, 0.0), 0.0).is_err());
        let cfg = anchor();
        assert!(dwell_times(&cfg, -1.0).is_err());
    }

    #[test]
    fn figures_data_flags_singular_rows() {
        let cfg = anchor();
        let revival = std::f64::consts::PI / 2.0;
        let rows = figures_data(&cfg, &[0.3, revival, 0.9]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(!rows[0].singular && rows[0].final1_real_level0 == 0.15);
        assert!(rows[1].singular && rows[1].final1_real_level0.is_nan());
        assert!(!rows[2].singular);
        // Unconditional and final-0 columns stay finite at the revival.
        assert!(rows[1].dwell0.is_finite() && rows[1].final0_real_level0.is_finite());
    }
}

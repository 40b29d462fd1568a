//! System-detector weak-measurement simulator.
//!
//! A finite-dimensional system is coupled to a one-dimensional pointer
//! through H_int = lambda q A during a measurement window [0, tau_m]; the
//! pointer momentum is read out afterwards, optionally conditioned on a
//! post-selection projector applied after a further free interval.  Two
//! independent evaluation paths are provided:
//!
//! * the first-order path propagates exact operator moments, yielding the
//!   real and imaginary conditional-time components directly;
//! * the grid path discretizes the pointer coordinate, evolves every
//!   pointer slice exactly at finite coupling, simulates the momentum
//!   readout, and extrapolates the coupling to zero.
//!
//! The grid path knows nothing about weak values, so it serves as an
//! independent oracle for the first-order formulas.

use crate::error::{Result, TimeObsError};
use crate::scattering::UnitsConvention;
use crate::two_level::Level;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Weakness threshold: readings with lambda tau_m sqrt(var q) ||A|| / hbar
/// above this are flagged as outside the weak regime.
const WEAK_LIMIT: f64 = 0.1;

/// Post-selection probabilities below this are treated as rare events that
/// cannot be conditioned on numerically.
const MIN_POSTSELECT: f64 = 1e-6;

/// Gaussian pointer state described by its first and second moments.
#[derive(Debug, Clone, Copy)]
pub struct DetectorState {
    /// Mean pointer position.
    pub q_mean: f64,
    /// Mean pointer momentum.
    pub p_mean: f64,
    /// Position variance.
    pub var_q: f64,
    /// Momentum variance.
    pub var_p: f64,
    /// Symmetrized covariance Re<q p> - <q><p>.
    pub covariance: f64,
}

impl DetectorState {
    /// Detector from explicit moments; the Robertson-Schroedinger bound
    /// var_q var_p - cov^2 >= hbar^2/4 must hold.
    pub fn new(
        q_mean: f64,
        p_mean: f64,
        var_q: f64,
        var_p: f64,
        covariance: f64,
        units: &UnitsConvention,
    ) -> Result<Self> {
        let all_finite = q_mean.is_finite()
            && p_mean.is_finite()
            && var_q.is_finite()
            && var_p.is_finite()
            && covariance.is_finite();
        if !all_finite || var_q <= 0.0 || var_p <= 0.0 {
            return Err(TimeObsError::Domain(format!(
                "detector moments must be finite with positive variances; got \
                 var_q={var_q}, var_p={var_p}"
            )));
        }
        let bound = units.hbar * units.hbar / 4.0;
        if var_q * var_p - covariance * covariance < bound * (1.0 - 1e-9) {
            return Err(TimeObsError::Domain(format!(
                "detector moments violate the uncertainty relation: \
                 var_q var_p - cov^2 = {} < hbar^2/4 = {bound}",
                var_q * var_p - covariance * covariance
            )));
        }
        Ok(DetectorState {
            q_mean,
            p_mean,
            var_q,
            var_p,
            covariance,
        })
    }

    /// Zero-mean minimal-uncertainty Gaussian with the given position
    /// variance and no position-momentum correlation.
    pub fn gaussian(var_q: f64, units: &UnitsConvention) -> Result<Self> {
        Self::gaussian_with_covariance(var_q, 0.0, units)
    }

    /// Zero-mean pure Gaussian with the given position variance and
    /// symmetrized covariance; the momentum variance is fixed by purity to
    /// (hbar^2/4 + cov^2) / var_q.
    pub fn gaussian_with_covariance(
        var_q: f64,
        covariance: f64,
        units: &UnitsConvention,
    ) -> Result<Self> {
        if !(var_q.is_finite() && var_q > 0.0 && covariance.is_finite()) {
            return Err(TimeObsError::Domain(format!(
                "pure Gaussian detector requires var_q > 0, got {var_q}"
            )));
        }
        let var_p = (units.hbar * units.hbar / 4.0 + covariance * covariance) / var_q;
        Self::new(0.0, 0.0, var_q, var_p, covariance, units)
    }

    /// Detector coefficient <q><p> - Re<q p> multiplying the imaginary
    /// part of a conditional time in the measured reading.
    pub fn detector_coefficient(&self) -> f64 {
        -self.covariance
    }

    /// True when the moments are those of a pure Gaussian wavefunction,
    /// which is what the grid oracle can represent.
    fn is_pure_gaussian(&self, units: &UnitsConvention) -> bool {
        let purity = self.var_q * self.var_p - self.covariance * self.covariance;
        let bound = units.hbar * units.hbar / 4.0;
        (purity / bound - 1.0).abs() < 1e-9
    }
}

/// Coupling strength and measurement duration.
#[derive(Debug, Clone, Copy)]
pub struct CouplingConfig {
    /// Coupling constant lambda in H_int = lambda q A.
    pub lambda: f64,
    /// Measurement duration tau_m.
    pub tau_m: f64,
}

impl CouplingConfig {
    /// Validated coupling configuration; both entries strictly positive.
    pub fn new(lambda: f64, tau_m: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 && tau_m.is_finite() && tau_m > 0.0 {
            Ok(CouplingConfig { lambda, tau_m })
        } else {
            Err(TimeObsError::Domain(format!(
                "coupling requires lambda > 0 and tau_m > 0, got \
                 lambda={lambda}, tau_m={tau_m}"
            )))
        }
    }
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).norm() / (1.0 + m.norm())
}

/// Finite-dimensional system: Hamiltonian, measured observable, initial
/// density matrix.
#[derive(Debug, Clone)]
pub struct FiniteSystem {
    hamiltonian: DMatrix<Complex64>,
    observable: DMatrix<Complex64>,
    initial: DMatrix<Complex64>,
}

impl FiniteSystem {
    /// System from a Hermitian Hamiltonian, a Hermitian observable, and a
    /// positive semidefinite unit-trace density matrix, all of one size.
    pub fn new(
        hamiltonian: DMatrix<Complex64>,
        observable: DMatrix<Complex64>,
        initial: DMatrix<Complex64>,
    ) -> Result<Self> {
        let d = hamiltonian.nrows();
        let square_same = d >= 1
            && hamiltonian.ncols() == d
            && observable.nrows() == d
            && observable.ncols() == d
            && initial.nrows() == d
            && initial.ncols() == d;
        if !square_same {
            return Err(TimeObsError::Domain(
                "system matrices must be square and of equal dimension".into(),
            ));
        }
        if hermitian_defect(&hamiltonian) > 1e-12 {
            return Err(TimeObsError::Domain("Hamiltonian is not Hermitian".into()));
        }
        if hermitian_defect(&observable) > 1e-12 {
            return Err(TimeObsError::Domain("observable is not Hermitian".into()));
        }
        if hermitian_defect(&initial) > 1e-12 {
            return Err(TimeObsError::Domain(
                "initial density matrix is not Hermitian".into(),
            ));
        }
        let trace = initial.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(TimeObsError::Domain(format!(
                "initial density matrix must have unit trace, got {trace}"
            )));
        }
        let eigenvalues = initial.clone().symmetric_eigen().eigenvalues;
        if eigenvalues.iter().any(|&l| l < -1e-10) {
            return Err(TimeObsError::Domain(
                "initial density matrix is not positive semidefinite".into(),
            ));
        }
        Ok(FiniteSystem {
            hamiltonian,
            observable,
            initial,
        })
    }

    /// System prepared in a normalized pure state.
    pub fn pure(
        hamiltonian: DMatrix<Complex64>,
        observable: DMatrix<Complex64>,
        state: DVector<Complex64>,
    ) -> Result<Self> {
        if (state.norm() - 1.0).abs() > 1e-10 {
            return Err(TimeObsError::Domain(
                "pure state vector must be normalized".into(),
            ));
        }
        let rho = &state * state.adjoint();
        Self::new(hamiltonian, observable, rho)
    }

    /// Rabi-driven two-level system starting in the lower level, measuring
    /// occupation of `measured`.  Basis ordering: index 0 is the lower
    /// level at energy -hbar omega / 2.
    pub fn two_level(
        omega: f64,
        coupling: Complex64,
        measured: Level,
        units: &UnitsConvention,
    ) -> Result<Self> {
        if !(omega.is_finite() && coupling.is_finite()) {
            return Err(TimeObsError::Domain(
                "two-level parameters must be finite".into(),
            ));
        }
        let h = 0.5 * units.hbar * omega;
        let hamiltonian = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(-h, 0.0),
                coupling.conj(),
                coupling,
                Complex64::new(h, 0.0),
            ],
        );
        let observable = level_projector(measured);
        let state =
            DVector::from_column_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        Self::pure(hamiltonian, observable, state)
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// The measured observable A.
    pub fn observable(&self) -> &DMatrix<Complex64> {
        &self.observable
    }

    /// The system Hamiltonian.
    pub fn hamiltonian(&self) -> &DMatrix<Complex64> {
        &self.hamiltonian
    }

    /// The initial density matrix.
    pub fn initial_state(&self) -> &DMatrix<Complex64> {
        &self.initial
    }

    /// Spectral norm of the observable, used in the weakness parameter.
    fn observable_norm(&self) -> f64 {
        self.observable
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()))
    }
}

/// Projector on one level of a two-dimensional system.
pub fn level_projector(level: Level) -> DMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match level {
        Level::Zero => DMatrix::from_row_slice(2, 2, &[one, zero, zero, zero]),
        Level::One => DMatrix::from_row_slice(2, 2, &[zero, zero, zero, one]),
    }
}

/// exp(-i H t / hbar) for Hermitian H, via the eigendecomposition.
fn propagator(h: &DMatrix<Complex64>, t: f64, hbar: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = eig
        .eigenvalues
        .map(|l| Complex64::from_polar(1.0, -l * t / hbar));
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Time integral over [0, tau_m] of the Heisenberg-picture observable,
/// accumulated as a midpoint Riemann sum that doubles its slice count
/// (starting from 1024) until successive refinements agree to 1e-10 in
/// Frobenius norm.
fn time_integrated_observable(
    sys: &FiniteSystem,
    tau_m: f64,
    hbar: f64,
) -> Result<DMatrix<Complex64>> {
    let eig = sys.hamiltonian.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let b = v.adjoint() * &sys.observable * v;
    let d = sys.dim();

    let sum_at = |n: usize| -> DMatrix<Complex64> {
        let dt = tau_m / n as f64;
        let mut s = DMatrix::<Complex64>::zeros(d, d);
        for a in 0..d {
            for bb in 0..d {
                let omega = (eig.eigenvalues[a] - eig.eigenvalues[bb]) / hbar;
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let t = (j as f64 + 0.5) * dt;
                    acc += Complex64::from_polar(1.0, omega * t);
                }
                s[(a, bb)] = b[(a, bb)] * acc * dt;
            }
        }
        s
    };

    let mut n = 1024usize;
    let mut current = sum_at(n);
    loop {
        n *= 2;
        let refined = sum_at(n);
        let rel = (&refined - &current).norm() / refined.norm().max(1e-300);
        current = refined;
        if rel <= 1e-10 {
            break;
        }
        if n >= (1 << 21) {
            return Err(TimeObsError::Domain(format!(
                "time-integrated observable did not stabilize at {n} slices \
                 (relative change {rel:.3e})"
            )));
        }
    }
    Ok(v * current * v.adjoint())
}

/// Outcome of a simulated weak reading.
#[derive(Debug, Clone, Copy)]
pub struct WeakOutcome {
    /// The reading itself; see the producing function for its meaning.
    pub value: f64,
    /// Weakness parameter lambda tau_m sqrt(var q) ||A|| / hbar.
    pub weakness: f64,
    /// True when the weakness parameter is within the weak regime.
    pub weak_regime: bool,
}

fn weakness_of(
    sys: &FiniteSystem,
    det: &DetectorState,
    lambda: f64,
    tau_m: f64,
    units: &UnitsConvention,
) -> f64 {
    lambda * tau_m * det.var_q.sqrt() * sys.observable_norm() / units.hbar
}

/// Unconditional weak value of the observable averaged over the
/// measurement window, Tr(rho_0 F)/tau_m with F the time-integrated
/// Heisenberg observable.  This equals the first-order pointer-momentum
/// shift divided by lambda tau_m.
pub fn weak_value_unconditional(
    sys: &FiniteSystem,
    det: &DetectorState,
    cfg: &CouplingConfig,
    units: &UnitsConvention,
) -> Result<WeakOutcome> {
    let f = time_integrated_observable(sys, cfg.tau_m, units.hbar)?;
    let value = (&sys.initial * &f).trace().re / cfg.tau_m;
    let weakness = weakness_of(sys, det, cfg.lambda, cfg.tau_m, units);
    Ok(WeakOutcome {
        value,
        weakness,
        weak_regime: weakness <= WEAK_LIMIT,
    })
}

/// Conditional weak reading and its decomposition.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalOutcome {
    /// Measured conditional weak value of the observable averaged over the
    /// window: (real_part + (2/hbar) c_det imag_part) / tau_m.
    pub value: f64,
    /// Real conditional-time component Re<P F>/<P> (units of time).
    pub real_part: f64,
    /// Imaginary conditional-time component Im<P F>/<P> (units of time).
    pub imag_part: f64,
    /// Post-selection probability <P>.
    pub probability: f64,
    /// Weakness parameter of the configured coupling.
    pub weakness: f64,
    /// True when the weakness parameter is within the weak regime.
    pub weak_regime: bool,
}

fn check_projector(b: &DMatrix<Complex64>, d: usize) -> Result<()> {
    if b.nrows() != d || b.ncols() != d {
        return Err(TimeObsError::Domain(
            "post-selection projector has the wrong dimension".into(),
        ));
    }
    if hermitian_defect(b) > 1e-10 || (b * b - b).norm() > 1e-10 * (1.0 + b.norm()) {
        return Err(TimeObsError::Domain(
            "post-selection operator must be a Hermitian projector".into(),
        ));
    }
    Ok(())
}

/// Conditional weak value given post-selection on the projector `b`
/// applied `delta_t_post` after the measurement window ends.
///
/// Returns the first-order components: the real part is the symmetrized
/// correlation of the projector with the time-integrated observable, the
/// imaginary part the antisymmetrized one, and the measured value combines
/// them with the detector coefficient.
pub fn weak_value_conditional(
    sys: &FiniteSystem,
    det: &DetectorState,
    cfg: &CouplingConfig,
    b: &DMatrix<Complex64>,
    delta_t_post: f64,
    units: &UnitsConvention,
) -> Result<ConditionalOutcome> {
    if !(delta_t_post.is_finite() && delta_t_post >= 0.0) {
        return Err(TimeObsError::Domain(format!(
            "post-selection delay must be non-negative, got {delta_t_post}"
        )));
    }
    check_projector(b, sys.dim())?;
    let f = time_integrated_observable(sys, cfg.tau_m, units.hbar)?;
    let u = propagator(&sys.hamiltonian, cfg.tau_m + delta_t_post, units.hbar);
    let p_heis = u.adjoint() * b * u;
    let probability = (&sys.initial * &p_heis).trace().re;
    if probability < MIN_POSTSELECT {
        return Err(TimeObsError::VanishingProbability(format!(
            "post-selection probability {probability:.3e} is below {MIN_POSTSELECT}"
        )));
    }
    let g = (&sys.initial * &p_heis * &f).trace();
    let real_part = g.re / probability;
    let imag_part = g.im / probability;
    let c_det = det.detector_coefficient();
    let value = (real_part + 2.0 / units.hbar * c_det * imag_part) / cfg.tau_m;
    let weakness = weakness_of(sys, det, cfg.lambda, cfg.tau_m, units);
    Ok(ConditionalOutcome {
        value,
        real_part,
        imag_part,
        probability,
        weakness,
        weak_regime: weakness <= WEAK_LIMIT,
    })
}

/// Discretization of the pointer coordinate for the grid oracle.
#[derive(Debug, Clone, Copy)]
pub struct GridOracleConfig {
    /// Number of pointer grid points.
    pub grid_points: usize,
    /// Half-width of the grid in units of the pointer standard deviation.
    pub span_sigmas: f64,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        GridOracleConfig {
            grid_points: 2048,
            span_sigmas: 12.0,
        }
    }
}

/// Pointer wavefunction of the pure Gaussian family and its derivative.
fn pointer_wavefunction(det: &DetectorState, hbar: f64, q: f64) -> (Complex64, Complex64) {
    let s2 = det.var_q;
    let shape = Complex64::new(1.0, -2.0 * det.covariance / hbar) / (4.0 * s2);
    let dq = q - det.q_mean;
    let phi = Complex64::new((2.0 * PI * s2).powf(-0.25), 0.0)
        * (-shape * dq * dq + Complex64::new(0.0, det.p_mean * q / hbar)).exp();
    let dphi = phi * (-2.0 * shape * dq + Complex64::new(0.0, det.p_mean / hbar));
    (phi, dphi)
}

/// Extracts the state vector of a pure density matrix.
fn pure_state_of(sys: &FiniteSystem) -> Result<DVector<Complex64>> {
    let eig = sys.initial.clone().symmetric_eigen();
    let mut best = 0usize;
    for i in 0..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    if (eig.eigenvalues[best] - 1.0).abs() > 1e-10 {
        return Err(TimeObsError::Domain(
            "grid oracle requires a pure initial system state".into(),
        ));
    }
    Ok(eig.eigenvectors.column(best).into_owned())
}

/// Pointer-momentum readout at fixed coupling on the pointer grid,
/// conditioned on the projector `b`.  Returns (readout, probability).
#[allow(clippy::too_many_arguments)]
fn grid_readout(
    sys: &FiniteSystem,
    psi0: &DVector<Complex64>,
    det: &DetectorState,
    lambda: f64,
    tau_m: f64,
    b: &DMatrix<Complex64>,
    delta_t_post: f64,
    units: &UnitsConvention,
    grid: &GridOracleConfig,
) -> Result<(f64, f64)> {
    let hbar = units.hbar;
    let n = grid.grid_points;
    let half_span = grid.span_sigmas * det.var_q.sqrt();
    let dq = 2.0 * half_span / (n - 1) as f64;
    let u_post = propagator(&sys.hamiltonian, delta_t_post, hbar);

    // Projected system amplitudes for every pointer slice.
    let mut branch: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let q = det.q_mean - half_span + dq * j as f64;
        let h_q = &sys.hamiltonian + &sys.observable * Complex64::new(lambda * q, 0.0);
        let u_q = propagator(&h_q, tau_m, hbar);
        branch.push(b * &u_post * u_q * psi0);
    }

    let mut momentum_sum = 0.0f64;
    let mut norm_sum = 0.0f64;
    for j in 0..n {
        let q = det.q_mean - half_span + dq * j as f64;
        let (phi, dphi) = pointer_wavefunction(det, hbar, q);
        let weight = branch[j].norm_squared();
        // Central difference for the slowly varying system amplitudes;
        // one-sided at the edges where the Gaussian weight is negligible.
        let (lo, hi, denom) = if j == 0 {
            (j, j + 1, dq)
        } else if j == n - 1 {
            (j - 1, j, dq)
        } else {
            (j - 1, j + 1, 2.0 * dq)
        };
        let mut branch_phase = 0.0f64;
        for ((center, upper), lower) in branch[j]
            .iter()
            .zip(branch[hi].iter())
            .zip(branch[lo].iter())
        {
            let dv = (upper - lower) / denom;
            branch_phase += (center.conj() * dv).im;
        }
        let phi_sq = phi.norm_sqr();
        momentum_sum += hbar * ((phi.conj() * dphi).im * weight + phi_sq * branch_phase) * dq;
        norm_sum += phi_sq * weight * dq;
    }
    if norm_sum < MIN_POSTSELECT {
        return Err(TimeObsError::VanishingProbability(format!(
            "post-selection probability {norm_sum:.3e} is below {MIN_POSTSELECT}"
        )));
    }
    Ok((momentum_sum / norm_sum, norm_sum))
}

/// Conditional time measured by the explicit pointer simulation.
///
/// The readout is computed at the configured coupling and at half of it;
/// the two first-order estimates are Richardson-extrapolated to zero
/// coupling.  The returned value is the conditional time (not divided by
/// tau_m), directly comparable with
/// real_part + (2/hbar) c_det imag_part of [`weak_value_conditional`].
/// If the finite-coupling estimate deviates from the extrapolation by more
/// than ten percent the weak regime is declared violated.
pub fn conditional_time_grid(
    sys: &FiniteSystem,
    det: &DetectorState,
    cfg: &CouplingConfig,
    b: &DMatrix<Complex64>,
    delta_t_post: f64,
    units: &UnitsConvention,
    grid: &GridOracleConfig,
) -> Result<WeakOutcome> {
    let psi0 = checked_grid_inputs(sys, det, b, delta_t_post, units, grid)?;

    let (base, _) = grid_readout(
        sys,
        &psi0,
        det,
        0.0,
        cfg.tau_m,
        b,
        delta_t_post,
        units,
        grid,
    )?;
    let estimate_at = |lambda: f64| -> Result<f64> {
        let (readout, _) = grid_readout(
            sys,
            &psi0,
            det,
            lambda,
            cfg.tau_m,
            b,
            delta_t_post,
            units,
            grid,
        )?;
        Ok((base - readout) / lambda)
    };
    let full = estimate_at(cfg.lambda)?;
    let half = estimate_at(0.5 * cfg.lambda)?;
    let extrapolated = 2.0 * half - full;

    let scale = extrapolated.abs().max(1e-9 * cfg.tau_m);
    if (full - extrapolated).abs() > 0.1 * scale {
        return Err(TimeObsError::Weakness(format!(
            "second-order shift {:.3e} exceeds ten percent of the reading {:.3e}; \
             reduce lambda",
            (full - extrapolated).abs(),
            extrapolated
        )));
    }
    let weakness = weakness_of(sys, det, cfg.lambda, cfg.tau_m, units);
    Ok(WeakOutcome {
        value: extrapolated,
        weakness,
        weak_regime: weakness <= WEAK_LIMIT,
    })
}

/// Unconditional time reading from the pointer simulation: the grid
/// analogue of tau_m times [`weak_value_unconditional`].
pub fn unconditional_time_grid(
    sys: &FiniteSystem,
    det: &DetectorState,
    cfg: &CouplingConfig,
    units: &UnitsConvention,
    grid: &GridOracleConfig,
) -> Result<WeakOutcome> {
    let identity = DMatrix::<Complex64>::identity(sys.dim(), sys.dim());
    conditional_time_grid(sys, det, cfg, &identity, 0.0, units, grid)
}

/// First-order pointer estimate at a single finite coupling,
/// (readout(0) - readout(lambda)) / lambda, without extrapolation or
/// weak-regime enforcement.  Exposes the raw coupling dependence so a
/// caller can study the approach to the weak limit.
pub fn conditional_time_estimate(
    sys: &FiniteSystem,
    det: &DetectorState,
    cfg: &CouplingConfig,
    b: &DMatrix<Complex64>,
    delta_t_post: f64,
    units: &UnitsConvention,
    grid: &GridOracleConfig,
) -> Result<f64> {
    let psi0 = checked_grid_inputs(sys, det, b, delta_t_post, units, grid)?;
    let (base, _) = grid_readout(
        sys,
        &psi0,
        det,
        0.0,
        cfg.tau_m,
        b,
        delta_t_post,
        units,
        grid,
    )?;
    let (readout, _) = grid_readout(
        sys,
        &psi0,
        det,
        cfg.lambda,
        cfg.tau_m,
        b,
        delta_t_post,
        units,
        grid,
    )?;
    Ok((base - readout) / cfg.lambda)
}

/// Single-coupling estimate of the unconditional time reading.
pub fn unconditional_time_estimate(
    sys: &FiniteSystem,
    det: &DetectorState,
    cfg: &CouplingConfig,
    units: &UnitsConvention,
    grid: &GridOracleConfig,
) -> Result<f64> {
    let identity = DMatrix::<Complex64>::identity(sys.dim(), sys.dim());
    conditional_time_estimate(sys, det, cfg, &identity, 0.0, units, grid)
}

/// Validates the inputs shared by the pointer-grid entry points and
/// returns the pure system state.
fn checked_grid_inputs(
    sys: &FiniteSystem,
    det: &DetectorState,
    b: &DMatrix<Complex64>,
    delta_t_post: f64,
    units: &UnitsConvention,
    grid: &GridOracleConfig,
) -> Result<DVector<Complex64>> {
    if !det.is_pure_gaussian(units) {
        return Err(TimeObsError::Domain(
            "grid oracle supports only pure Gaussian detector states".into(),
        ));
    }
    if !(delta_t_post.is_finite() && delta_t_post >= 0.0) {
        return Err(TimeObsError::Domain(format!(
            "post-selection delay must be non-negative, got {delta_t_post}"
        )));
    }
    if grid.grid_points < 16 {
        return Err(TimeObsError::Domain(
            "grid oracle needs at least 16 pointer points".into(),
        ));
    }
    check_projector(b, sys.dim())?;
    pure_state_of(sys)
}

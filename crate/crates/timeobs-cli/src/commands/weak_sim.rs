//! Pointer-simulation sweep against the closed-form time readings.

use super::{CliError, CommandOutput};
use crate::config::{RunConfig, WeakSimSpec};
use crate::table::ResultTable;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timeobs::two_level::{
    conditional_components, dwell_times, occupation_probabilities, Level, TwoLevelConfig,
};
use timeobs::weak_sim::{
    conditional_time_estimate, level_projector, unconditional_time_estimate, CouplingConfig,
    DetectorState, FiniteSystem, GridOracleConfig,
};
use timeobs::Result as LibResult;

/// Runs the `weak-sim` command.
///
/// For the configured two-level measurement the pointer simulation is
/// evaluated at the configured coupling and at its halves; each row
/// carries the simulated reading, the closed-form value it should
/// approach, and their absolute difference.  The first row holds the
/// coupling-to-zero Richardson extrapolation of the two smallest
/// couplings.  With `weak_sim.random_configs = n` the sweep is repeated
/// for n seeded random parameter sets.
pub fn run(cfg: &RunConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let spec = cfg
        .weak_sim
        .ok_or_else(|| CliError::config("weak-sim requires a weak_sim section"))?;

    let mut table = ResultTable::new(
        "timeobs weak-sim",
        cfg.units.hbar,
        cfg.units.mass,
        &["lambda", "simulated", "analytic", "abs_error"],
    );
    sweep_block(cfg, &spec, None, &mut table)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for index in 1..=spec.random_configs {
        let sample = draw_config(&spec, cfg.units.hbar, &mut rng)?;
        let label = format!(
            "config {index}: omega={}, coupling={}, time={}",
            sample.omega, sample.coupling, sample.time
        );
        sweep_block(cfg, &sample, Some(&label), &mut table)?;
    }
    Ok(CommandOutput::success(table))
}

/// Appends the coupling sweep of one parameter set: the extrapolated row
/// first (lambda = 0), then ascending finite couplings.
fn sweep_block(
    cfg: &RunConfig,
    spec: &WeakSimSpec,
    label: Option<&str>,
    table: &mut ResultTable,
) -> Result<(), CliError> {
    let units = &cfg.units;
    let detector = DetectorState::gaussian_with_covariance(spec.var_q, spec.covariance, units)?;
    let system = FiniteSystem::two_level(
        spec.omega,
        Complex64::new(spec.coupling, 0.0),
        spec.level,
        units,
    )?;
    let grid = GridOracleConfig::default();

    let analytic = analytic_reading(spec, &detector, units.hbar)?;
    let lambdas = [0.25 * spec.lambda, 0.5 * spec.lambda, spec.lambda];
    let mut estimates = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let coupling = CouplingConfig::new(lambda, spec.time)?;
        let estimate = match spec.final_state {
            Some(final_level) => {
                let projector = level_projector(final_level);
                conditional_time_estimate(
                    &system, &detector, &coupling, &projector, 0.0, units, &grid,
                )?
            }
            None => unconditional_time_estimate(&system, &detector, &coupling, units, &grid)?,
        };
        estimates.push(estimate);
    }

    let extrapolated = 2.0 * estimates[0] - estimates[1];
    let first_row = vec![0.0, extrapolated, analytic, (extrapolated - analytic).abs()];
    match label {
        Some(text) => table.push_commented_row(text, first_row),
        None => table.push_row(first_row),
    }
    for (&lambda, &estimate) in lambdas.iter().zip(&estimates) {
        table.push_row(vec![
            lambda,
            estimate,
            analytic,
            (estimate - analytic).abs(),
        ]);
    }
    Ok(())
}

/// Closed-form reading the pointer should approach: the dwell time for
/// an unconditional run, or the conditional components combined with the
/// detector coefficient for a post-selected one.
fn analytic_reading(spec: &WeakSimSpec, detector: &DetectorState, hbar: f64) -> LibResult<f64> {
    let model = TwoLevelConfig::new(spec.omega, Complex64::new(spec.coupling, 0.0), hbar)?;
    match spec.final_state {
        None => {
            let (tau0, tau1) = dwell_times(&model, spec.time)?;
            Ok(match spec.level {
                Level::Zero => tau0,
                Level::One => tau1,
            })
        }
        Some(final_level) => {
            let times = conditional_components(&model, spec.time, final_level)?;
            let (real, imag) = match spec.level {
                Level::Zero => (times.real_level0, times.imag_level0),
                Level::One => (times.real_level1, times.imag_level1),
            };
            Ok(real + 2.0 * detector.detector_coefficient() / hbar * imag)
        }
    }
}

/// Seeded random parameter set sharing the detector and coupling scale of
/// the base run; draws landing on a singular conditioning time are
/// redrawn.
fn draw_config(
    base: &WeakSimSpec,
    hbar: f64,
    rng: &mut ChaCha8Rng,
) -> Result<WeakSimSpec, CliError> {
    for _ in 0..100 {
        let sample = WeakSimSpec {
            omega: rng.gen_range(0.5..3.0),
            coupling: rng.gen_range(0.5..2.0),
            time: rng.gen_range(0.3..1.2),
            random_configs: 0,
            ..*base
        };
        if let Some(final_level) = sample.final_state {
            let model =
                TwoLevelConfig::new(sample.omega, Complex64::new(sample.coupling, 0.0), hbar)?;
            if conditional_components(&model, sample.time, final_level).is_err() {
                continue;
            }
            let (p0, p1) = occupation_probabilities(&model, sample.time)?;
            let occupation = match final_level {
                Level::Zero => p0,
                Level::One => p1,
            };
            if occupation < 1e-3 {
                continue;
            }
        }
        return Ok(sample);
    }
    Err(CliError::config(
        "weak_sim.random_configs: could not sample a non-singular configuration",
    ))
}

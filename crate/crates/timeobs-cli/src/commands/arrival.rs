//! Arrival expectation sweeps with their classical counterpart.

use super::{CliError, CommandOutput};
use crate::config::{RunConfig, SweepVariable};
use crate::table::ResultTable;
use rayon::prelude::*;
use timeobs::arrival::{
    arrival_distribution, classical_arrival_flux, ArrivalConfig, ArrivalDirection, ComplexArrival,
    PhaseSpaceDensity,
};
use timeobs::wavepacket::GaussianPacket;

/// Runs the `arrival` command: the complex arrival expectation of
/// right-movers swept over the packet momentum or the resolution window,
/// next to the classical flux of the matching phase-space beam at the
/// window midpoint.  Rows whose window undercuts the packet's resolution
/// bound carry a marker comment.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = cfg
        .arrival
        .ok_or_else(|| CliError::config("arrival requires an arrival section"))?;
    let packet = cfg
        .packet
        .ok_or_else(|| CliError::config("arrival requires a packet section"))?;

    let step = (spec.sweep_max - spec.sweep_min) / (spec.points - 1) as f64;
    let values: Vec<f64> = (0..spec.points)
        .map(|i| spec.sweep_min + step * i as f64)
        .collect();

    let evaluate = |value: f64| -> Result<(ComplexArrival, f64), CliError> {
        let (point_packet, dt) = match spec.sweep {
            SweepVariable::Momentum => (
                GaussianPacket::with_start(value, packet.sigma, packet.x0)?,
                spec.dt.expect("validated on load"),
            ),
            SweepVariable::Window => (packet, value),
        };
        let window = ArrivalConfig::new(spec.x, dt)?;
        let quantum = arrival_distribution(
            &point_packet,
            &window,
            ArrivalDirection::Positive,
            &cfg.units,
            &cfg.quadrature,
        )?;
        let beam = PhaseSpaceDensity::wigner_matched(&point_packet, &cfg.units)?;
        let classical = classical_arrival_flux(&beam, spec.x, 0.5 * dt, &cfg.quadrature)?;
        Ok((quantum, classical))
    };

    let results: Vec<Result<(ComplexArrival, f64), CliError>> =
        values.par_iter().map(|&value| evaluate(value)).collect();

    let mut table = ResultTable::new(
        "timeobs arrival",
        cfg.units.hbar,
        cfg.units.mass,
        &[spec.sweep.column(), "re_pi", "im_pi", "classical_j_plus"],
    );
    for (i, (value, result)) in values.iter().zip(results).enumerate() {
        let (quantum, classical) = result.map_err(|e| match e {
            CliError::Run { exit, message } => CliError::Run {
                exit,
                message: format!(
                    "sweep index {i} ({} = {value}): {message}",
                    spec.sweep.column()
                ),
            },
            other => other,
        })?;
        let row = vec![*value, quantum.pi1, quantum.pi2, classical];
        if quantum.resolution_warning {
            table.push_commented_row("resolution: dt below hbar/E_kin", row);
        } else {
            table.push_row(row);
        }
    }
    Ok(CommandOutput::success(table))
}

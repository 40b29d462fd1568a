//! Asymptotic transmission times behind the barrier.

use super::{CliError, CommandOutput};
use crate::config::RunConfig;
use crate::table::ResultTable;
use timeobs::time_densities::asymptotic_times;

/// Runs the `asymptotic` command: the mean transmission arrival time at
/// the reference point x2, the free-flight reference M x2 / p_mean, and
/// the stationary-phase times it decomposes into.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let barrier = cfg
        .barrier
        .ok_or_else(|| CliError::config("asymptotic requires a barrier section"))?;
    let packet = cfg
        .packet
        .ok_or_else(|| CliError::config("asymptotic requires a packet section"))?;
    let x2 = cfg
        .asymptotic_x2
        .ok_or_else(|| CliError::config("asymptotic requires asymptotic.x2"))?;

    let times = asymptotic_times(&packet, &barrier, x2, &cfg.units, &cfg.quadrature)?;
    let free_flight = cfg.units.mass * x2 / packet.p_mean;

    let mut table = ResultTable::new(
        "timeobs asymptotic",
        cfg.units.hbar,
        cfg.units.mass,
        &[
            "x2",
            "t_tun",
            "free_flight",
            "t_T_ph",
            "t_T_im",
            "correction",
        ],
    );
    table.push_row(vec![
        x2,
        times.tunneling_time,
        free_flight,
        times.phase_time,
        times.imaginary_time,
        times.correction_integral,
    ]);
    Ok(CommandOutput::success(table))
}

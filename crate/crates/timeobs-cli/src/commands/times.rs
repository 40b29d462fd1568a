//! Time-density profiles over a position grid.

use super::{CliError, CommandOutput};
use crate::config::RunConfig;
use crate::table::ResultTable;
use timeobs::scattering::BarrierModel;
use timeobs::time_densities::{
    dwell_density, profile, reflect_density, tunnel_correction_density, tunnel_density,
    uniform_grid,
};

/// Runs the `times` command: dwell, transmission, correction and
/// reflection densities per grid point, with the packet's transmission
/// and reference times as footer metadata.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let barrier = cfg
        .barrier
        .ok_or_else(|| CliError::config("times requires a barrier section"))?;
    let packet = cfg
        .packet
        .ok_or_else(|| CliError::config("times requires a packet section"))?;
    let grid = cfg
        .grid
        .ok_or_else(|| CliError::config("times requires a grid section"))?;

    let xs = uniform_grid(grid.x_min, grid.x_max, grid.points)?;
    let prof = match profile(&packet, &barrier, &xs, &cfg.units, &cfg.quadrature) {
        Ok(p) => p,
        Err(first) => return Err(locate_grid_failure(cfg, &barrier, &xs, first)),
    };

    let mut table = ResultTable::new(
        "timeobs times",
        cfg.units.hbar,
        cfg.units.mass,
        &["x", "tau_dw", "tau_tun", "tau_corr", "tau_refl"],
    );
    for (i, &x) in prof.xs.iter().enumerate() {
        table.push_row(vec![
            x,
            prof.dwell[i],
            prof.tunnel[i],
            prof.tunnel_correction[i],
            prof.reflect[i],
        ]);
    }
    table.push_footer("T", prof.transmission);
    table.push_footer("R", prof.reflection);
    table.push_footer("t_T_ph", prof.phase_time);
    table.push_footer("t_T_im", prof.imaginary_time);
    Ok(CommandOutput::success(table))
}

/// Re-evaluates the grid pointwise to attribute a profile failure to a
/// grid index; falls back to the original error when the failure is not
/// tied to a single point.
fn locate_grid_failure(
    cfg: &RunConfig,
    barrier: &BarrierModel,
    xs: &[f64],
    first: timeobs::TimeObsError,
) -> CliError {
    let packet = cfg.packet.expect("checked by the caller");
    let free = matches!(barrier, BarrierModel::Free);
    for (i, &x) in xs.iter().enumerate() {
        let point = dwell_density(&packet, barrier, x, &cfg.units, &cfg.quadrature)
            .and_then(|_| tunnel_density(&packet, barrier, x, &cfg.units, &cfg.quadrature))
            .and_then(|_| {
                tunnel_correction_density(&packet, barrier, x, &cfg.units, &cfg.quadrature)
            })
            .and_then(|_| {
                if free {
                    Ok(0.0)
                } else {
                    reflect_density(&packet, barrier, x, &cfg.units, &cfg.quadrature)
                }
            });
        if let Err(e) = point {
            return CliError::run_at(&format!("grid index {i} (x = {x})"), e);
        }
    }
    CliError::from(first)
}

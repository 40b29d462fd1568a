//! Two-level dwell and conditional times over a time grid.

use super::{CliError, CommandOutput};
use crate::config::RunConfig;
use crate::table::ResultTable;
use num_complex::Complex64;
use timeobs::two_level::{figures_data, TwoLevelConfig};

/// Runs the `two-level` command: occupation dwell times and conditional
/// components on a uniform time grid.  Rows at singular conditioning
/// times carry NaN conditional cells and a marker comment.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = cfg
        .two_level
        .ok_or_else(|| CliError::config("two-level requires a two_level section"))?;
    let model = TwoLevelConfig::new(
        spec.omega,
        Complex64::new(spec.coupling, 0.0),
        cfg.units.hbar,
    )?;

    let step = (spec.t_max - spec.t_min) / (spec.points - 1) as f64;
    let ts: Vec<f64> = (0..spec.points)
        .map(|i| spec.t_min + step * i as f64)
        .collect();
    let rows = figures_data(&model, &ts)?;

    let mut table = ResultTable::new(
        "timeobs two-level",
        cfg.units.hbar,
        cfg.units.mass,
        &[
            "t",
            "tau0",
            "tau1",
            "tau1_c1",
            "tau0_c1_level0",
            "tau0_c1_level1",
            "tau0_c2",
        ],
    );
    for row in &rows {
        let values = vec![
            row.t,
            row.dwell0,
            row.dwell1,
            row.final1_real_level0,
            row.final0_real_level0,
            row.final0_real_level1,
            row.final0_imag_level0,
        ];
        if row.singular {
            table.push_commented_row("singular", values);
        } else {
            table.push_row(values);
        }
    }
    table.push_footer("omega", spec.omega);
    table.push_footer("rabi", model.rabi_frequency());
    Ok(CommandOutput::success(table))
}

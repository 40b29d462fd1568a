//! Command implementations, one per physics domain.

pub mod arrival;
pub mod asymptotic;
pub mod times;
pub mod two_level;
pub mod validate;
pub mod weak_sim;

use crate::table::ResultTable;
use timeobs::TimeObsError;

/// Table plus the process exit code the command requests.
pub struct CommandOutput {
    pub table: ResultTable,
    pub exit: i32,
}

impl CommandOutput {
    pub fn success(table: ResultTable) -> Self {
        CommandOutput { table, exit: 0 }
    }
}

/// Command failure, split by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Configuration problem (exit 2).
    Config(String),
    /// Computation problem, with the exit code derived from its kind.
    Run { exit: i32, message: String },
}

impl CliError {
    /// Missing section or inconsistent request (exit 2).
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    /// Wraps a library error with positional context.
    pub fn run_at(context: &str, e: TimeObsError) -> Self {
        CliError::Run {
            exit: exit_code(&e),
            message: format!("{context}: {e}"),
        }
    }
}

impl From<TimeObsError> for CliError {
    fn from(e: TimeObsError) -> Self {
        CliError::Run {
            exit: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// 3 for non-convergence, 4 for physical-domain failures.
fn exit_code(e: &TimeObsError) -> i32 {
    match e {
        TimeObsError::NonConvergence { .. } => 3,
        _ => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let non_convergence = TimeObsError::NonConvergence {
            panels: 8,
            estimate: Complex64::new(1.0, 0.0),
            residual: 0.5,
        };
        assert_eq!(exit_code(&non_convergence), 3);
        assert_eq!(exit_code(&TimeObsError::Domain("d".into())), 4);
        assert_eq!(exit_code(&TimeObsError::Overflow("o".into())), 4);
        assert_eq!(
            exit_code(&TimeObsError::VanishingProbability("v".into())),
            4
        );
        assert_eq!(
            exit_code(&TimeObsError::Singular {
                order: 2,
                message: "s".into()
            }),
            4
        );
        assert_eq!(exit_code(&TimeObsError::Weakness("w".into())), 4);
    }
}

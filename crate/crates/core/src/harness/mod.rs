//! Experiment runner: opponents, simulation loops and result files.

mod opponent;
mod record;
mod run;

pub use opponent::{opponent_next, Opponent, OpponentSpec};
pub use record::{read_records, write_records, write_results, Format, TrajectoryRecord, CSV_HEADER};
pub use run::{default_swap_grid, run_apm_check, run_experiment, ExperimentConfig, Mode};

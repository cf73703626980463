//! Simulation campaigns: steady-state initialization, transfer-welfare grids,
//! debt rollovers and parameter-variation scenarios.

pub mod rollover;
pub mod scenarios;
pub mod steady;
pub mod transfer;

pub use rollover::{run_rollover, simulate_path, summarize_paths, GenerationRecord, RolloverPath, RolloverRun, RolloverSpec, RolloverSummary};
pub use transfer::{prepare_cell, run_transfer_grid, transfer_welfare, AxisRange, CellStatus, PreparedCell, TransferGridSpec, WelfareGridCell};
pub use scenarios::{paired_differences, run_scenarios, welfare_range, PairedDifferences, ScenarioBundle, ScenarioOutcome, ScenarioSpec, Variation, WelfareRange};
pub use steady::{initialize_steady_state, simulate_no_transfer, SteadySpec, SteadyState, SteadyStats};

/// Stream identifiers. Each campaign consumes its own stream so that, for
/// example, calibration never shifts the draws used by an experiment.
pub mod streams {
    pub const CALIBRATION: u64 = 1;
    pub const STEADY_STATE: u64 = 2;
    pub const TRANSFER: u64 = 3;
    /// Rollover path `p` uses stream `ROLLOVER_BASE + p`.
    pub const ROLLOVER_BASE: u64 = 1 << 32;
}

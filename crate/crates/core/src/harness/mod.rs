//! Experiment orchestration: configuration, grids, bounds and plot files.

pub mod bounds;
pub mod config;
pub mod grid;
pub mod plot;

pub use bounds::report_bounds;
pub use config::{ExperimentConfig, PolicyKind};
pub use grid::{build_scenario, run_cells, run_grid, GridResult, RunResult, SummaryRow};
pub use plot::emit_plots;

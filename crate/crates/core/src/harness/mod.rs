//! Configuration-driven experiments: single runs, domain sweeps, convergence
//! studies, Hopf checks and report summaries.

pub mod checks;
pub mod config;
mod converge;
mod output;
mod run;
mod sweep;
mod tools;

pub use config::{ExperimentConfig, HopfPreset};
pub use converge::{convergence_study, ConvergenceReport, ErrorSeries};
pub use output::{svg_line_plot, write_atomic};
pub use run::{run_single, simulate, snapshot_record, write_field_csv, write_run_outputs, DiagContext, LevelRun};
pub use sweep::{level_cells, run_domain_sweep, LevelDelta, LevelSummary, SweepReport};
pub use tools::{hopf_preset_config, hopf_verify, summarize_dir, HopfVerifyReport};

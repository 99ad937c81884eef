//! Experiment orchestration: TOML run configs, seeded runs, sweeps over the
//! figure axes, paired comparisons and CSV/TOML/JSON outputs.
//!
//! Config grammar: TOML with the sections `[run]`, `[scenario]`, `[semantic]`
//! (with `[semantic.surrogate]` and `[semantic.profiles]`), `[env]`,
//! `[learner]` and `[sweep]`. Every key is optional; unknown keys are errors.

mod compare;
mod config;
mod output;
mod run;
mod solve;
mod sweep;

pub use compare::{compare_algorithms, group_rows, render_report, PairedDiff, RunSet};
pub use config::{emit_config, load_config, parse_config, RunConfig, RunSection, SweepSection};
pub use output::{
    checkpoint_path, episodes_path, read_episodes, summary_path, trace_path, write_rows, EpisodeRow, MetricStats,
    RunSummary, Stat,
};
pub use run::{run, RunOutcome};
pub use solve::{oracle_report, OracleReport};
pub use sweep::{aggregate_rows, sweep, SweepOutcome, SweepParam, SweepRow};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) => 2,
        }
    }
}

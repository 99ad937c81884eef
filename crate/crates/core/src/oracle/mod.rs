//! Exhaustive-search reference for the single-slot joint allocation problem,
//! plus a relaxation-gap probe for fractional subchannel selection.

mod enumerate;
mod instance;
mod objective;
mod relax;

pub use enumerate::{agent_candidates, enumerate_optimum, Optimum};
pub use instance::{Grids, StaticInstance, DEFAULT_ENUMERATION_CAP};
pub use objective::{evaluate_objective, evaluate_unchecked, Breakdown, Violations};
pub use relax::{relaxation_gap, threshold, RelaxationReport, ThresholdRule};

use thiserror::Error;

use crate::env::EnvError;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("bad assignment shape: {0}")]
    Shape(String),
    #[error("agent {agent}: {field} is not on the instance grid")]
    OffGrid { agent: usize, field: &'static str },
    #[error("{per_agent}^{agents} joint assignments exceed the cap of {cap}; coarsen the grids")]
    TooLarge { per_agent: u64, agents: usize, cap: u64 },
    #[error("no assignment has a finite objective")]
    NoFiniteValue,
    #[error(transparent)]
    Env(#[from] EnvError),
}

//! Multi-agent MDP over the channel and semantic layers: observations,
//! action decoding, slot dynamics, payload accounting, rewards and episode
//! metrics.

mod action;
mod config;
mod metrics;
mod observation;
mod platoon_env;
mod slot;

pub use action::{action_dim, decode_action, encode_action, ActionLayout, AgentAction};
pub use config::{CommMode, DeliveryGate, EnvConfig, RewardForm};
pub use metrics::{measure_delay, EpisodeMetrics};
pub use observation::{
    build_observation, interference_features, normalize_gain, normalize_interference, normalize_residual,
    observation_dim, RESIDUAL_SCALE,
};
pub use platoon_env::{EnvSpec, PlatoonEnv, StepInfo, StepResult};
pub use slot::{
    evaluate_slot, pair_members, transmissions, PairingPlan, PlatoonOutcome, ReceiverOutcome, SlotOutcome,
    SlotParams,
};

use thiserror::Error;

use crate::channel::ChannelError;
use crate::semantics::SemanticsError;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("raw action has {got} entries, expected {expected}")]
    ActionDim { expected: usize, got: usize },
    #[error("{got} actions for {expected} agents")]
    AgentCount { expected: usize, got: usize },
    #[error("decoded action of agent {0} violates its bounds")]
    Infeasible(usize),
    #[error("invalid env config: {0}")]
    Invalid(String),
    #[error("environment used before reset")]
    NotReset,
    #[error("episode already finished")]
    EpisodeDone,
}

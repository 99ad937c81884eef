//! Actor-critic learners on a small dense-network substrate: the
//! multi-agent learner with per-agent local critics and twin global critics,
//! centralised DDPG / TD3 baselines, replay, checkpoints and the episode loop.

mod adam;
mod centralized;
mod checkpoint;
pub mod grad;
mod learner;
mod mlp;
mod random;
mod replay;
mod samramarl;
mod train;

pub use adam::{Adam, AdamParams};
pub use centralized::Centralized;
pub use checkpoint::{Checkpoint, NetworkRecord, OptimizerRecord, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use learner::{select_action, AlgorithmId, Dims, Learner, LearnerConfig, UpdateStats};
pub use mlp::{soft_update, Activation, Mlp, Tape};
pub use random::RandomPolicy;
pub use replay::{ReplayBuffer, Transition};
pub use samramarl::Samramarl;
pub use train::{
    build_learner, dims_of, env_spec_for, evaluate, run_episode, train, EpisodeRecord, NoHooks, Phase, TrainHooks,
    TrainOutput,
};

use thiserror::Error;

use crate::env::EnvError;

#[derive(Debug, Error, PartialEq)]
pub enum MarlError {
    #[error("{what}: expected {expected}, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("unknown algorithm {0:?} (expected samramarl, ddpg, td3, ddpg_no_sc or random)")]
    UnknownAlgorithm(String),
    #[error("invalid learner config: {0}")]
    Config(String),
    #[error("non-finite parameters after update {update}")]
    NonFinite { update: u64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Checkpoint, MarlError, Mlp, Transition};
use crate::env::CommMode;
use crate::scalar::{Precision, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    Samramarl,
    Ddpg,
    Td3,
    DdpgNoSc,
    /// Uniform random actions; used as a reference policy.
    Random,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] =
        [AlgorithmId::Samramarl, AlgorithmId::Ddpg, AlgorithmId::Td3, AlgorithmId::DdpgNoSc, AlgorithmId::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Samramarl => "samramarl",
            AlgorithmId::Ddpg => "ddpg",
            AlgorithmId::Td3 => "td3",
            AlgorithmId::DdpgNoSc => "ddpg_no_sc",
            AlgorithmId::Random => "random",
        }
    }

    pub fn comm_mode(self) -> CommMode {
        match self {
            AlgorithmId::DdpgNoSc => CommMode::Bits,
            _ => CommMode::Semantic,
        }
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = MarlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| MarlError::UnknownAlgorithm(s.to_string()))
    }
}

impl std::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Learner section of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub algorithm: AlgorithmId,
    pub precision: Precision,
    /// Training episodes; 0 evaluates the initial policy only.
    pub episodes: u32,
    /// Greedy evaluation episodes run after training.
    pub eval_episodes: u32,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    /// Updates start once the buffer holds more than this many transitions;
    /// `None` uses the batch size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update_threshold: Option<usize>,
    pub buffer_capacity: usize,
    pub exploration_noise: f64,
    pub policy_delay: u32,
    pub target_noise: f64,
    pub target_noise_clip: f64,
    /// Weight of the local-critic term in the actor gradient.
    pub local_critic_weight: f64,
    /// Update local critics at every step instead of with the actors.
    pub local_critics_every_step: bool,
    pub parallel_gradients: bool,
    /// Output-layer initialisation half-width.
    pub final_layer_init: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            algorithm: AlgorithmId::Samramarl,
            precision: Precision::F64,
            episodes: 500,
            eval_episodes: 10,
            actor_hidden: vec![1024, 512],
            critic_hidden: vec![1024, 512, 256],
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            gamma: 0.99,
            tau: 0.005,
            batch_size: 64,
            update_threshold: None,
            buffer_capacity: 1_000_000,
            exploration_noise: 0.2,
            policy_delay: 2,
            target_noise: 0.2,
            target_noise_clip: 0.5,
            local_critic_weight: 1.0,
            local_critics_every_step: false,
            parallel_gradients: false,
            final_layer_init: 3e-3,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), MarlError> {
        let bad = |key: &str, msg: &str| Err(MarlError::Config(format!("learner.{key}: {msg}")));
        if self.eval_episodes == 0 {
            return bad("eval_episodes", "must be at least 1");
        }
        if self.actor_hidden.iter().chain(&self.critic_hidden).any(|&h| h == 0) {
            return bad("actor_hidden", "layer widths must be positive");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau", "must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1]");
        }
        for (k, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("exploration_noise", self.exploration_noise),
            ("target_noise", self.target_noise),
            ("target_noise_clip", self.target_noise_clip),
            ("local_critic_weight", self.local_critic_weight),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(k, "must be non-negative");
            }
        }
        if !(self.final_layer_init.is_finite() && self.final_layer_init > 0.0) {
            return bad("final_layer_init", "must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be at least 1");
        }
        if self.buffer_capacity == 0 {
            return bad("buffer_capacity", "must be at least 1");
        }
        if self.policy_delay == 0 {
            return bad("policy_delay", "must be at least 1");
        }
        Ok(())
    }

    pub fn threshold(&self) -> usize {
        self.update_threshold.unwrap_or(self.batch_size)
    }
}

/// Problem sizes a learner is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub agents: usize,
    pub obs: usize,
    pub action: usize,
}

/// Losses from one update call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub local_critic_loss: Option<f64>,
    pub actor_objective: Option<f64>,
}

/// Common interface of every training algorithm.
pub trait Learner: Send {
    fn algorithm(&self) -> AlgorithmId;

    fn dims(&self) -> Dims;

    /// One raw action per agent; `explore` adds Gaussian exploration noise.
    fn act(&mut self, obs: &[Vec<f64>], explore: bool) -> Result<Vec<Vec<f64>>, MarlError>;

    /// Stores `t` and runs an update when the buffer is large enough.
    fn observe(&mut self, t: Transition) -> Result<Option<UpdateStats>, MarlError>;

    /// Whether every parameter is finite.
    fn is_finite(&self) -> bool;

    fn checkpoint(&self) -> Checkpoint;

    fn restore(&mut self, ckpt: &Checkpoint) -> Result<(), MarlError>;
}

/// `pi(s) + N(0, noise_std^2)` per coordinate, clipped to `[-1, 1]`.
pub fn select_action<T: Real, R: Rng + ?Sized>(
    actor: &Mlp<T>,
    obs: &[T],
    noise_std: f64,
    rng: &mut R,
) -> Result<Vec<f64>, MarlError> {
    let a = actor.forward(obs)?;
    if noise_std == 0.0 {
        return Ok(a.into_iter().map(|v| v.widen().clamp(-1.0, 1.0)).collect());
    }
    let normal = Normal::new(0.0, noise_std).map_err(|e| MarlError::Config(e.to_string()))?;
    Ok(a.into_iter()
        .map(|v| (v.widen() + normal.sample(rng)).clamp(-1.0, 1.0))
        .collect())
}

pub(crate) fn cast<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::of(x)).collect()
}

pub(crate) fn concat<T: Real>(parts: &[Vec<f64>]) -> Vec<T> {
    parts.iter().flat_map(|p| p.iter().map(|&x| T::of(x))).collect()
}

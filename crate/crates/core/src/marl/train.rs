//! Episode loop shared by every learner.

use serde::{Deserialize, Serialize};

use super::{AlgorithmId, Centralized, Dims, Learner, LearnerConfig, MarlError, RandomPolicy, Samramarl, Transition};
use crate::env::{EnvSpec, EpisodeMetrics, PlatoonEnv, StepResult};
use crate::rng::{derive_seed, Purpose};
use crate::scalar::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Eval,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Train => "train",
            Phase::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub phase: Phase,
    pub episode: u32,
    pub seed: u64,
    pub metrics: EpisodeMetrics,
}

/// Observer callbacks; both default to doing nothing.
pub trait TrainHooks {
    fn on_step(&mut self, _phase: Phase, _episode: u32, _step: &StepResult) {}

    fn on_episode(&mut self, _record: &EpisodeRecord) {}
}

/// Hooks that ignore everything.
pub struct NoHooks;

impl TrainHooks for NoHooks {}

/// The environment spec an algorithm runs on: the non-semantic baseline
/// switches the environment to bit mode.
pub fn env_spec_for(algorithm: AlgorithmId, spec: &EnvSpec) -> EnvSpec {
    let mut s = spec.clone();
    s.env.mode = algorithm.comm_mode();
    s
}

pub fn dims_of(spec: &EnvSpec) -> Dims {
    Dims { agents: spec.num_agents(), obs: spec.obs_dim(), action: spec.action_dim() }
}

pub fn build_learner(cfg: &LearnerConfig, dims: Dims, seed: u64) -> Result<Box<dyn Learner>, MarlError> {
    cfg.validate()?;
    Ok(match (cfg.algorithm, cfg.precision) {
        (AlgorithmId::Samramarl, Precision::F64) => Box::new(Samramarl::<f64>::new(cfg, dims, seed)?),
        (AlgorithmId::Samramarl, Precision::F32) => Box::new(Samramarl::<f32>::new(cfg, dims, seed)?),
        (AlgorithmId::Random, _) => Box::new(RandomPolicy::new(dims, seed)),
        (alg, Precision::F64) => Box::new(Centralized::<f64>::new(alg, cfg, dims, seed)?),
        (alg, Precision::F32) => Box::new(Centralized::<f32>::new(alg, cfg, dims, seed)?),
    })
}

/// Plays one episode. With `learn`, transitions are fed to the learner and
/// actions carry exploration noise; otherwise the policy acts greedily.
pub fn run_episode(
    env: &mut PlatoonEnv,
    learner: &mut dyn Learner,
    seed: u64,
    learn: bool,
    phase: Phase,
    episode: u32,
    hooks: &mut dyn TrainHooks,
) -> Result<EpisodeMetrics, MarlError> {
    let mut obs = env.reset(seed)?;
    loop {
        let actions = learner.act(&obs, learn)?;
        let step = env.step(&actions)?;
        hooks.on_step(phase, episode, &step);
        let done = step.done;
        if learn {
            learner.observe(Transition {
                obs: std::mem::take(&mut obs),
                actions,
                local_rewards: step.local_rewards.clone(),
                global_reward: step.global_reward,
                next_obs: step.observations.clone(),
                done,
            })?;
        }
        obs = step.observations;
        if done {
            break;
        }
    }
    Ok(env.episode_metrics()?)
}

pub struct TrainOutput {
    pub learner: Box<dyn Learner>,
    pub records: Vec<EpisodeRecord>,
    /// Similarity-table lookups clamped to the grid during the run.
    pub similarity_clamps: u64,
}

/// Trains for `cfg.episodes` episodes, then evaluates greedily for
/// `cfg.eval_episodes`.
pub fn train(spec: &EnvSpec, cfg: &LearnerConfig, seed: u64, hooks: &mut dyn TrainHooks) -> Result<TrainOutput, MarlError> {
    let spec = env_spec_for(cfg.algorithm, spec);
    let mut env = PlatoonEnv::new(spec.clone())?;
    let mut learner = build_learner(cfg, dims_of(&spec), seed)?;
    let mut records = Vec::new();
    for ep in 0..cfg.episodes {
        let s = derive_seed(seed, Purpose::Episode, u64::from(ep));
        let metrics = run_episode(&mut env, learner.as_mut(), s, true, Phase::Train, ep, hooks)?;
        let rec = EpisodeRecord { phase: Phase::Train, episode: ep, seed: s, metrics };
        hooks.on_episode(&rec);
        records.push(rec);
    }
    records.extend(evaluate(&mut env, learner.as_mut(), seed, cfg.eval_episodes, hooks)?);
    Ok(TrainOutput { learner, records, similarity_clamps: env.surrogate().clamp_count() })
}

/// Greedy evaluation on the evaluation seed sequence of `seed`.
pub fn evaluate(
    env: &mut PlatoonEnv,
    learner: &mut dyn Learner,
    seed: u64,
    episodes: u32,
    hooks: &mut dyn TrainHooks,
) -> Result<Vec<EpisodeRecord>, MarlError> {
    let mut out = Vec::with_capacity(episodes as usize);
    for ep in 0..episodes {
        let s = derive_seed(seed, Purpose::Evaluation, u64::from(ep));
        let metrics = run_episode(env, learner, s, false, Phase::Eval, ep, hooks)?;
        let rec = EpisodeRecord { phase: Phase::Eval, episode: ep, seed: s, metrics };
        hooks.on_episode(&rec);
        out.push(rec);
    }
    Ok(out)
}

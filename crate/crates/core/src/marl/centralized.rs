//! Single centralised agent over the joint observation and joint action:
//! DDPG (one critic, no delay) and TD3 (twin critics, target smoothing,
//! delayed policy). The non-semantic baseline is DDPG on a bit-mode
//! environment.

use rand_distr::{Distribution, Normal};

use super::grad::{actor_objective_and_grad, critic_loss_and_grad, single_target, twin_target, CriticTerm};
use super::learner::concat;
use super::samramarl::layer_sizes;
use super::{
    select_action, Activation, Adam, AdamParams, AlgorithmId, Checkpoint, Dims, LearnerConfig, Learner, MarlError,
    Mlp, ReplayBuffer, Transition, UpdateStats,
};
use crate::rng::{self, Purpose, SimRng};
use crate::scalar::{Precision, Real};

#[derive(Debug, Clone)]
pub struct Centralized<T: Real> {
    algorithm: AlgorithmId,
    cfg: LearnerConfig,
    dims: Dims,
    pub actor: Mlp<T>,
    pub actor_target: Mlp<T>,
    pub critics: Vec<Mlp<T>>,
    pub critic_targets: Vec<Mlp<T>>,
    actor_opt: Adam<T>,
    critic_opts: Vec<Adam<T>>,
    buffer: ReplayBuffer,
    explore_rng: SimRng,
    replay_rng: SimRng,
    noise_rng: SimRng,
    updates: u64,
    env_steps: u64,
}

impl<T: Real> Centralized<T> {
    pub fn new(algorithm: AlgorithmId, cfg: &LearnerConfig, dims: Dims, seed: u64) -> Result<Self, MarlError> {
        cfg.validate()?;
        let twin = match algorithm {
            AlgorithmId::Ddpg | AlgorithmId::DdpgNoSc => false,
            AlgorithmId::Td3 => true,
            other => return Err(MarlError::UnknownAlgorithm(format!("{other} is not a centralised learner"))),
        };
        let mut init = rng::stream(seed, Purpose::Init, 0);
        let fl = cfg.final_layer_init;
        let joint_obs = dims.agents * dims.obs;
        let joint_act = dims.agents * dims.action;
        let critic_sizes = layer_sizes(joint_obs + joint_act, &cfg.critic_hidden, 1);
        let critics: Vec<Mlp<T>> = (0..if twin { 2 } else { 1 })
            .map(|_| Mlp::init(&critic_sizes, Activation::Relu, Activation::Identity, fl, &mut init))
            .collect();
        let actor = Mlp::init(
            &layer_sizes(joint_obs, &cfg.actor_hidden, joint_act),
            Activation::Relu,
            Activation::Tanh,
            fl,
            &mut init,
        );
        let hp = AdamParams::default();
        Ok(Centralized {
            algorithm,
            cfg: cfg.clone(),
            dims,
            actor_target: actor.clone(),
            actor_opt: Adam::new(actor.num_params(), hp),
            actor,
            critic_targets: critics.clone(),
            critic_opts: critics.iter().map(|c| Adam::new(c.num_params(), hp)).collect(),
            critics,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            explore_rng: rng::stream(seed, Purpose::Exploration, 0),
            replay_rng: rng::stream(seed, Purpose::Replay, 0),
            noise_rng: rng::stream(seed, Purpose::TargetNoise, 0),
            updates: 0,
            env_steps: 0,
        })
    }

    fn twin(&self) -> bool {
        self.critics.len() == 2
    }

    fn delay(&self) -> u64 {
        if self.twin() {
            u64::from(self.cfg.policy_delay)
        } else {
            1
        }
    }

    /// Bootstrapped critic targets; TD3 adds clipped smoothing noise to the
    /// target action and takes the twin minimum.
    pub fn targets_for(&mut self, batch: &[Transition]) -> Result<Vec<f64>, MarlError> {
        let smoothing = if self.twin() && self.cfg.target_noise > 0.0 {
            Some(Normal::new(0.0, self.cfg.target_noise).map_err(|e| MarlError::Config(e.to_string()))?)
        } else {
            None
        };
        let clip = self.cfg.target_noise_clip;
        let mut out = Vec::with_capacity(batch.len());
        for t in batch {
            if t.done {
                out.push(t.global_reward);
                continue;
            }
            let s: Vec<T> = concat(&t.next_obs);
            let mut a = self.actor_target.forward(&s)?;
            if let Some(nd) = &smoothing {
                for v in &mut a {
                    let eps: f64 = nd.sample(&mut self.noise_rng);
                    *v = T::of((v.widen() + eps.clamp(-clip, clip)).clamp(-1.0, 1.0));
                }
            }
            let mut x = s;
            x.extend(a);
            let q1 = self.critic_targets[0].forward(&x)?[0].widen();
            out.push(if self.twin() {
                let q2 = self.critic_targets[1].forward(&x)?[0].widen();
                twin_target(t.global_reward, self.cfg.gamma, q1, q2, false)
            } else {
                single_target(t.global_reward, self.cfg.gamma, q1, false)
            });
        }
        Ok(out)
    }

    pub fn update_on(&mut self, batch: &[Transition]) -> Result<UpdateStats, MarlError> {
        let y: Vec<T> = self.targets_for(batch)?.into_iter().map(T::of).collect();
        let x: Vec<Vec<T>> = batch
            .iter()
            .map(|t| {
                let mut v: Vec<T> = concat(&t.obs);
                v.extend(concat::<T>(&t.actions));
                v
            })
            .collect();
        let mut loss_sum = 0.0;
        for j in 0..self.critics.len() {
            let (loss, grad) = critic_loss_and_grad(&self.critics[j], &x, &y, self.cfg.parallel_gradients)?;
            self.critic_opts[j].step(self.critics[j].params_mut(), &grad, self.cfg.critic_lr);
            loss_sum += loss.widen();
        }
        self.updates += 1;
        let mut stats = UpdateStats { critic_loss: loss_sum / self.critics.len() as f64, ..Default::default() };
        if self.updates % self.delay() == 0 {
            let obs: Vec<Vec<T>> = batch.iter().map(|t| concat(&t.obs)).collect();
            let term = CriticTerm {
                critic: &self.critics[0],
                inputs: &x,
                action_offset: self.dims.agents * self.dims.obs,
                weight: T::one(),
            };
            let (j, g) = actor_objective_and_grad(&self.actor, &obs, &[term], self.cfg.parallel_gradients)?;
            let descent: Vec<T> = g.into_iter().map(|v| -v).collect();
            self.actor_opt.step(self.actor.params_mut(), &descent, self.cfg.actor_lr);
            stats.actor_objective = Some(j.widen());
            let tau = T::of(self.cfg.tau);
            let actor = self.actor.clone();
            self.actor_target.soft_update_from(&actor, tau);
            for j in 0..self.critics.len() {
                let c = self.critics[j].clone();
                self.critic_targets[j].soft_update_from(&c, tau);
            }
        }
        if !self.is_finite() {
            return Err(MarlError::NonFinite { update: self.updates });
        }
        Ok(stats)
    }

    fn precision() -> Precision {
        if std::mem::size_of::<T>() == 4 {
            Precision::F32
        } else {
            Precision::F64
        }
    }
}

impl<T: Real> Learner for Centralized<T> {
    fn algorithm(&self) -> AlgorithmId {
        self.algorithm
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn act(&mut self, obs: &[Vec<f64>], explore: bool) -> Result<Vec<Vec<f64>>, MarlError> {
        if obs.len() != self.dims.agents {
            return Err(MarlError::Shape { what: "joint observation", expected: self.dims.agents, got: obs.len() });
        }
        let noise = if explore { self.cfg.exploration_noise } else { 0.0 };
        let joint = select_action(&self.actor, &concat::<T>(obs), noise, &mut self.explore_rng)?;
        Ok(joint.chunks(self.dims.action).map(<[f64]>::to_vec).collect())
    }

    fn observe(&mut self, t: Transition) -> Result<Option<UpdateStats>, MarlError> {
        self.buffer.push(t);
        self.env_steps += 1;
        if self.buffer.len() <= self.cfg.threshold() {
            return Ok(None);
        }
        let idx = self.buffer.sample_indices(self.cfg.batch_size, &mut self.replay_rng);
        let batch: Vec<Transition> = idx.into_iter().map(|i| self.buffer.get(i).clone()).collect();
        self.update_on(&batch).map(Some)
    }

    fn is_finite(&self) -> bool {
        self.actor.is_finite()
            && self.actor_target.is_finite()
            && self.critics.iter().chain(&self.critic_targets).all(Mlp::is_finite)
    }

    fn checkpoint(&self) -> Checkpoint {
        let mut c = Checkpoint::new(self.algorithm, Self::precision(), self.dims);
        c.updates = self.updates;
        c.env_steps = self.env_steps;
        c.push_net("actor", &self.actor);
        c.push_net("actor_target", &self.actor_target);
        c.push_opt("actor", &self.actor_opt);
        for j in 0..self.critics.len() {
            c.push_net(&format!("critic_{j}"), &self.critics[j]);
            c.push_net(&format!("critic_target_{j}"), &self.critic_targets[j]);
            c.push_opt(&format!("critic_{j}"), &self.critic_opts[j]);
        }
        c.push_rng("exploration", &self.explore_rng);
        c.push_rng("replay", &self.replay_rng);
        c.push_rng("target_noise", &self.noise_rng);
        c
    }

    fn restore(&mut self, ckpt: &Checkpoint) -> Result<(), MarlError> {
        ckpt.check(self.algorithm, Self::precision(), self.dims)?;
        let hp = AdamParams::default();
        let mut next = self.clone();
        next.actor = ckpt.net("actor", &self.actor)?;
        next.actor_target = ckpt.net("actor_target", &self.actor)?;
        next.actor_opt = ckpt.opt("actor", self.actor.num_params(), hp)?;
        for j in 0..self.critics.len() {
            next.critics[j] = ckpt.net(&format!("critic_{j}"), &self.critics[j])?;
            next.critic_targets[j] = ckpt.net(&format!("critic_target_{j}"), &self.critics[j])?;
            next.critic_opts[j] = ckpt.opt(&format!("critic_{j}"), self.critics[j].num_params(), hp)?;
        }
        next.explore_rng = ckpt.rng("exploration")?;
        next.replay_rng = ckpt.rng("replay")?;
        next.noise_rng = ckpt.rng("target_noise")?;
        next.updates = ckpt.updates;
        next.env_steps = ckpt.env_steps;
        *self = next;
        Ok(())
    }
}

//! Per-agent actors and local critics with a pair of global critics over the
//! joint observation and joint raw action.

use super::grad::{actor_objective_and_grad, critic_loss_and_grad, single_target, twin_target, CriticTerm};
use super::learner::{cast, concat};
use super::{
    select_action, Activation, Adam, AdamParams, AlgorithmId, Checkpoint, Dims, LearnerConfig, Learner, MarlError,
    Mlp, ReplayBuffer, Transition, UpdateStats,
};
use crate::rng::{self, Purpose, SimRng};
use crate::scalar::{Precision, Real};

#[derive(Debug, Clone)]
pub struct Samramarl<T: Real> {
    cfg: LearnerConfig,
    dims: Dims,
    pub actors: Vec<Mlp<T>>,
    pub actor_targets: Vec<Mlp<T>>,
    pub local_critics: Vec<Mlp<T>>,
    pub local_targets: Vec<Mlp<T>>,
    pub global_critics: Vec<Mlp<T>>,
    pub global_targets: Vec<Mlp<T>>,
    actor_opts: Vec<Adam<T>>,
    local_opts: Vec<Adam<T>>,
    global_opts: Vec<Adam<T>>,
    buffer: ReplayBuffer,
    explore_rng: SimRng,
    replay_rng: SimRng,
    updates: u64,
    env_steps: u64,
}

pub(crate) fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = Vec::with_capacity(hidden.len() + 2);
    s.push(input);
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

pub(crate) fn grad_norm<T: Real>(g: &[T]) -> f64 {
    g.iter().map(|x| x.widen() * x.widen()).sum::<f64>().sqrt()
}

impl<T: Real> Samramarl<T> {
    pub fn new(cfg: &LearnerConfig, dims: Dims, seed: u64) -> Result<Self, MarlError> {
        cfg.validate()?;
        let mut init = rng::stream(seed, Purpose::Init, 0);
        let fl = cfg.final_layer_init;
        let joint = dims.agents * (dims.obs + dims.action);
        let global_sizes = layer_sizes(joint, &cfg.critic_hidden, 1);
        let global_critics: Vec<Mlp<T>> = (0..2)
            .map(|_| Mlp::init(&global_sizes, Activation::Relu, Activation::Identity, fl, &mut init))
            .collect();
        let mut actors = Vec::new();
        let mut local_critics = Vec::new();
        for _ in 0..dims.agents {
            actors.push(Mlp::init(
                &layer_sizes(dims.obs, &cfg.actor_hidden, dims.action),
                Activation::Relu,
                Activation::Tanh,
                fl,
                &mut init,
            ));
            local_critics.push(Mlp::init(
                &layer_sizes(dims.obs + dims.action, &cfg.critic_hidden, 1),
                Activation::Relu,
                Activation::Identity,
                fl,
                &mut init,
            ));
        }
        let hp = AdamParams::default();
        let opts = |nets: &[Mlp<T>]| nets.iter().map(|n| Adam::new(n.num_params(), hp)).collect::<Vec<_>>();
        Ok(Samramarl {
            cfg: cfg.clone(),
            dims,
            actor_targets: actors.clone(),
            local_targets: local_critics.clone(),
            global_targets: global_critics.clone(),
            actor_opts: opts(&actors),
            local_opts: opts(&local_critics),
            global_opts: opts(&global_critics),
            actors,
            local_critics,
            global_critics,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            explore_rng: rng::stream(seed, Purpose::Exploration, 0),
            replay_rng: rng::stream(seed, Purpose::Replay, 0),
            updates: 0,
            env_steps: 0,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn action_offset(&self, agent: usize) -> usize {
        self.dims.agents * self.dims.obs + agent * self.dims.action
    }

    fn joint_input(obs: &[Vec<f64>], actions: &[Vec<f64>]) -> Vec<T> {
        let mut x: Vec<T> = concat(obs);
        x.extend(concat::<T>(actions));
        x
    }

    /// Twin-critic bootstrapped targets for the global critics.
    pub fn global_targets_for(&self, batch: &[Transition]) -> Result<Vec<f64>, MarlError> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.global_reward);
                }
                let mut x: Vec<T> = concat(&t.next_obs);
                for (n, s) in t.next_obs.iter().enumerate() {
                    x.extend(self.actor_targets[n].forward(&cast::<T>(s))?);
                }
                let q1 = self.global_targets[0].forward(&x)?[0].widen();
                let q2 = self.global_targets[1].forward(&x)?[0].widen();
                Ok(twin_target(t.global_reward, self.cfg.gamma, q1, q2, false))
            })
            .collect()
    }

    /// Regresses both global critics onto the shared twin-min target.
    pub fn global_critic_update(&mut self, batch: &[Transition]) -> Result<[f64; 2], MarlError> {
        let y: Vec<T> = self.global_targets_for(batch)?.into_iter().map(T::of).collect();
        let x: Vec<Vec<T>> = batch.iter().map(|t| Self::joint_input(&t.obs, &t.actions)).collect();
        let mut losses = [0.0; 2];
        for j in 0..2 {
            let (loss, grad) = critic_loss_and_grad(&self.global_critics[j], &x, &y, self.cfg.parallel_gradients)?;
            self.global_opts[j].step(self.global_critics[j].params_mut(), &grad, self.cfg.critic_lr);
            losses[j] = loss.widen();
        }
        Ok(losses)
    }

    pub fn local_targets_for(&self, batch: &[Transition], agent: usize) -> Result<Vec<f64>, MarlError> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.local_rewards[agent]);
                }
                let s: Vec<T> = cast(&t.next_obs[agent]);
                let mut x = s.clone();
                x.extend(self.actor_targets[agent].forward(&s)?);
                let q = self.local_targets[agent].forward(&x)?[0].widen();
                Ok(single_target(t.local_rewards[agent], self.cfg.gamma, q, false))
            })
            .collect()
    }

    pub fn local_critic_update(&mut self, batch: &[Transition], agent: usize) -> Result<f64, MarlError> {
        let y: Vec<T> = self.local_targets_for(batch, agent)?.into_iter().map(T::of).collect();
        let x: Vec<Vec<T>> = batch
            .iter()
            .map(|t| {
                let mut v: Vec<T> = cast(&t.obs[agent]);
                v.extend(cast::<T>(&t.actions[agent]));
                v
            })
            .collect();
        let (loss, grad) = critic_loss_and_grad(&self.local_critics[agent], &x, &y, self.cfg.parallel_gradients)?;
        self.local_opts[agent].step(self.local_critics[agent].params_mut(), &grad, self.cfg.critic_lr);
        Ok(loss.widen())
    }

    /// Objective and gradient of agent `agent`'s actor through the frozen
    /// first global critic and its local critic.
    pub fn actor_objective(&self, batch: &[Transition], agent: usize) -> Result<(f64, Vec<T>), MarlError> {
        let obs: Vec<Vec<T>> = batch.iter().map(|t| cast(&t.obs[agent])).collect();
        let joint: Vec<Vec<T>> = batch.iter().map(|t| Self::joint_input(&t.obs, &t.actions)).collect();
        let local: Vec<Vec<T>> = batch
            .iter()
            .map(|t| {
                let mut v: Vec<T> = cast(&t.obs[agent]);
                v.extend(cast::<T>(&t.actions[agent]));
                v
            })
            .collect();
        let mut terms = vec![CriticTerm {
            critic: &self.global_critics[0],
            inputs: &joint,
            action_offset: self.action_offset(agent),
            weight: T::one(),
        }];
        if self.cfg.local_critic_weight != 0.0 {
            terms.push(CriticTerm {
                critic: &self.local_critics[agent],
                inputs: &local,
                action_offset: self.dims.obs,
                weight: T::of(self.cfg.local_critic_weight),
            });
        }
        let (j, g) = actor_objective_and_grad(&self.actors[agent], &obs, &terms, self.cfg.parallel_gradients)?;
        Ok((j.widen(), g))
    }

    /// One ascent step on the actor objective; returns (objective, gradient norm).
    pub fn actor_update(&mut self, batch: &[Transition], agent: usize) -> Result<(f64, f64), MarlError> {
        let (j, g) = self.actor_objective(batch, agent)?;
        let norm = grad_norm(&g);
        let descent: Vec<T> = g.into_iter().map(|x| -x).collect();
        self.actor_opts[agent].step(self.actors[agent].params_mut(), &descent, self.cfg.actor_lr);
        Ok((j, norm))
    }

    /// Global critics and their targets every call; actors, local critics
    /// and their targets every `policy_delay` calls.
    pub fn update_on(&mut self, batch: &[Transition]) -> Result<UpdateStats, MarlError> {
        let losses = self.global_critic_update(batch)?;
        let tau = T::of(self.cfg.tau);
        for j in 0..2 {
            let main = self.global_critics[j].clone();
            self.global_targets[j].soft_update_from(&main, tau);
        }
        self.updates += 1;
        let mut stats = UpdateStats { critic_loss: 0.5 * (losses[0] + losses[1]), ..Default::default() };
        let policy_step = self.updates % u64::from(self.cfg.policy_delay) == 0;
        let mut local_sum = 0.0;
        let mut local_done = false;
        if self.cfg.local_critics_every_step {
            for n in 0..self.dims.agents {
                local_sum += self.local_critic_update(batch, n)?;
            }
            local_done = true;
        }
        if policy_step {
            let mut obj = 0.0;
            for n in 0..self.dims.agents {
                if !self.cfg.local_critics_every_step {
                    local_sum += self.local_critic_update(batch, n)?;
                    local_done = true;
                }
                obj += self.actor_update(batch, n)?.0;
                let actor = self.actors[n].clone();
                self.actor_targets[n].soft_update_from(&actor, tau);
                let local = self.local_critics[n].clone();
                self.local_targets[n].soft_update_from(&local, tau);
            }
            stats.actor_objective = Some(obj / self.dims.agents as f64);
        }
        if local_done {
            stats.local_critic_loss = Some(local_sum / self.dims.agents as f64);
        }
        if !self.is_finite() {
            return Err(MarlError::NonFinite { update: self.updates });
        }
        Ok(stats)
    }

    fn nets(&self) -> Vec<(String, &Mlp<T>)> {
        let mut v = Vec::new();
        for j in 0..2 {
            v.push((format!("global_critic_{j}"), &self.global_critics[j]));
            v.push((format!("global_target_{j}"), &self.global_targets[j]));
        }
        for n in 0..self.dims.agents {
            v.push((format!("actor_{n}"), &self.actors[n]));
            v.push((format!("actor_target_{n}"), &self.actor_targets[n]));
            v.push((format!("local_critic_{n}"), &self.local_critics[n]));
            v.push((format!("local_target_{n}"), &self.local_targets[n]));
        }
        v
    }

    fn precision() -> Precision {
        if std::mem::size_of::<T>() == 4 {
            Precision::F32
        } else {
            Precision::F64
        }
    }
}

impl<T: Real> Learner for Samramarl<T> {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::Samramarl
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn act(&mut self, obs: &[Vec<f64>], explore: bool) -> Result<Vec<Vec<f64>>, MarlError> {
        if obs.len() != self.dims.agents {
            return Err(MarlError::Shape { what: "joint observation", expected: self.dims.agents, got: obs.len() });
        }
        let noise = if explore { self.cfg.exploration_noise } else { 0.0 };
        obs.iter()
            .zip(&self.actors)
            .map(|(o, actor)| select_action(actor, &cast::<T>(o), noise, &mut self.explore_rng))
            .collect()
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
        self.nets().iter().all(|(_, n)| n.is_finite())
    }

    fn checkpoint(&self) -> Checkpoint {
        let mut c = Checkpoint::new(AlgorithmId::Samramarl, Self::precision(), self.dims);
        c.updates = self.updates;
        c.env_steps = self.env_steps;
        for (name, net) in self.nets() {
            c.push_net(&name, net);
        }
        for j in 0..2 {
            c.push_opt(&format!("global_critic_{j}"), &self.global_opts[j]);
        }
        for n in 0..self.dims.agents {
            c.push_opt(&format!("actor_{n}"), &self.actor_opts[n]);
            c.push_opt(&format!("local_critic_{n}"), &self.local_opts[n]);
        }
        c.push_rng("exploration", &self.explore_rng);
        c.push_rng("replay", &self.replay_rng);
        c
    }

    fn restore(&mut self, ckpt: &Checkpoint) -> Result<(), MarlError> {
        ckpt.check(AlgorithmId::Samramarl, Self::precision(), self.dims)?;
        let hp = AdamParams::default();
        let mut next = self.clone();
        for j in 0..2 {
            next.global_critics[j] = ckpt.net(&format!("global_critic_{j}"), &self.global_critics[j])?;
            next.global_targets[j] = ckpt.net(&format!("global_target_{j}"), &self.global_targets[j])?;
            next.global_opts[j] = ckpt.opt(&format!("global_critic_{j}"), self.global_critics[j].num_params(), hp)?;
        }
        for n in 0..self.dims.agents {
            next.actors[n] = ckpt.net(&format!("actor_{n}"), &self.actors[n])?;
            next.actor_targets[n] = ckpt.net(&format!("actor_target_{n}"), &self.actors[n])?;
            next.local_critics[n] = ckpt.net(&format!("local_critic_{n}"), &self.local_critics[n])?;
            next.local_targets[n] = ckpt.net(&format!("local_target_{n}"), &self.local_critics[n])?;
            next.actor_opts[n] = ckpt.opt(&format!("actor_{n}"), self.actors[n].num_params(), hp)?;
            next.local_opts[n] = ckpt.opt(&format!("local_critic_{n}"), self.local_critics[n].num_params(), hp)?;
        }
        next.explore_rng = ckpt.rng("exploration")?;
        next.replay_rng = ckpt.rng("replay")?;
        next.updates = ckpt.updates;
        next.env_steps = ckpt.env_steps;
        *self = next;
        Ok(())
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    build_observation, decode_action, interference_features, measure_delay, observation_dim, transmissions,
    ActionLayout, AgentAction, EnvConfig, EnvError, EpisodeMetrics, SlotOutcome, SlotParams,
};
use crate::channel::{advance_mobility, build_topology, ChannelModel, ChannelRealization, ScenarioConfig, TopologyState};
use crate::rng::{self, Purpose};
use crate::semantics::{QoEProfile, SemanticConfig, SimilaritySurrogate};

/// Everything the environment is configured by.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub scenario: ScenarioConfig,
    pub semantic: SemanticConfig,
    pub env: EnvConfig,
}

impl EnvSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        self.scenario.validate()?;
        self.semantic.validate()?;
        self.env.validate()?;
        let window = self.semantic.window_ms;
        if window % self.scenario.slot_ms != 0 {
            return Err(EnvError::Invalid("semantic.window_ms: must be a multiple of scenario.slot_ms".into()));
        }
        Ok(())
    }

    pub fn slots_per_episode(&self) -> u32 {
        self.env
            .slots_per_episode
            .unwrap_or(self.semantic.window_ms / self.scenario.slot_ms)
    }

    pub fn action_layout(&self) -> ActionLayout {
        ActionLayout {
            num_subchannels: self.scenario.num_subchannels,
            platoon_size: self.scenario.platoon_size,
            max_power_w: self.scenario.max_power_w(),
            u_max_text: self.semantic.u_max_text,
            u_max_image: self.semantic.u_max_image,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.scenario.num_platoons
    }

    pub fn obs_dim(&self) -> usize {
        observation_dim(self.scenario.num_subchannels, self.scenario.platoon_size)
    }

    pub fn action_dim(&self) -> usize {
        self.action_layout().dim()
    }

    /// Slot parameters for a given per-platoon payload.
    pub fn slot_params(&self, demand_suts: f64) -> SlotParams {
        let s = &self.semantic;
        SlotParams {
            bandwidth_hz: self.scenario.subchannel_bandwidth_hz,
            slot_s: self.scenario.slot_s(),
            window_s: s.window_s(),
            demand_suts,
            entropy_sm: s.entropy_sm,
            entropy_mm_text: s.entropy_mm_text,
            entropy_mm_image: s.entropy_mm_image,
            logistic_alpha: s.logistic_alpha,
            objective_lambda: s.objective_lambda,
            reward_w1: s.reward_w1,
            reward_w2: s.reward_w2,
            qoe_threshold: s.qoe_threshold,
            transform_factor_bits: s.transform_factor_bits,
            v2i_default_u: self.env.v2i_default_u,
            reward_form: self.env.reward_form,
            delivery_gate: self.env.delivery_gate,
            mode: self.env.mode,
        }
    }
}

/// Result of one environment step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observations: Vec<Vec<f64>>,
    pub local_rewards: Vec<f64>,
    pub global_reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct StepInfo {
    pub slot: u64,
    pub actions: Vec<AgentAction>,
    pub outcome: SlotOutcome,
    /// Raw action entries clipped into the box this step.
    pub clipped: usize,
}

#[derive(Debug, Clone)]
struct Episode {
    topology: TopologyState,
    channel: ChannelModel,
    realization: ChannelRealization,
    profiles: Vec<Vec<QoEProfile>>,
    demand_suts: f64,
    delivered: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
    prev_interference: Vec<Vec<f64>>,
    slot: u64,
    reward_sum: f64,
    qoe_sum: f64,
    collisions: u64,
    score_violations: u64,
    clipped: u64,
}

/// Multi-agent platooning environment: one agent per platoon leader.
#[derive(Debug, Clone)]
pub struct PlatoonEnv {
    spec: EnvSpec,
    surrogate: SimilaritySurrogate,
    episode: Option<Episode>,
}

impl PlatoonEnv {
    pub fn new(spec: EnvSpec) -> Result<Self, EnvError> {
        spec.validate()?;
        let surrogate = spec.semantic.surrogate.build()?;
        Ok(PlatoonEnv { spec, surrogate, episode: None })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn surrogate(&self) -> &SimilaritySurrogate {
        &self.surrogate
    }

    fn ep(&self) -> Result<&Episode, EnvError> {
        self.episode.as_ref().ok_or(EnvError::NotReset)
    }

    /// Draws a fresh topology, channel, QoE profiles and payload.
    pub fn reset(&mut self, seed: u64) -> Result<Vec<Vec<f64>>, EnvError> {
        let sc = &self.spec.scenario;
        let topology = build_topology(sc, seed)?;
        let channel = ChannelModel::new(sc, &topology, seed);
        let realization = channel.realization(0);

        let mut prng = rng::stream(seed, Purpose::Profiles, 0);
        let profiles = (0..sc.num_platoons)
            .map(|_| (0..sc.platoon_size).map(|_| self.spec.semantic.profiles.sample(&mut prng)).collect())
            .collect();

        let sem = &self.spec.semantic;
        let mut demand_suts = match sem.demand_suts {
            Some(d) => d,
            None => {
                let [lo, hi] = sem.demand_range_suts;
                let mut drng = rng::stream(seed, Purpose::Demand, 0);
                if hi > lo {
                    drng.random_range(lo..hi)
                } else {
                    lo
                }
            }
        };
        if let Some(cap) = sem.demand_cap_suts {
            demand_suts = demand_suts.min(cap / sc.num_platoons as f64);
        }

        let n = sc.num_platoons;
        let zero_i = vec![0.0; sc.platoon_size * sc.num_subchannels];
        self.episode = Some(Episode {
            topology,
            channel,
            realization,
            profiles,
            demand_suts,
            delivered: vec![Vec::new(); n],
            cumulative: vec![0.0; n],
            prev_interference: vec![zero_i; n],
            slot: 0,
            reward_sum: 0.0,
            qoe_sum: 0.0,
            collisions: 0,
            score_violations: 0,
            clipped: 0,
        });
        self.observations()
    }

    pub fn observations(&self) -> Result<Vec<Vec<f64>>, EnvError> {
        let ep = self.ep()?;
        Ok(ep
            .topology
            .platoons
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let residual = (ep.demand_suts - ep.cumulative[n]).max(0.0);
                build_observation(&ep.realization, p, &ep.prev_interference[n], residual)
            })
            .collect())
    }

    pub fn realization(&self) -> Result<&ChannelRealization, EnvError> {
        Ok(&self.ep()?.realization)
    }

    pub fn topology(&self) -> Result<&TopologyState, EnvError> {
        Ok(&self.ep()?.topology)
    }

    pub fn profiles(&self) -> Result<&[Vec<QoEProfile>], EnvError> {
        Ok(&self.ep()?.profiles)
    }

    pub fn demand_suts(&self) -> Result<f64, EnvError> {
        Ok(self.ep()?.demand_suts)
    }

    /// Residual payload per platoon, suts.
    pub fn residuals(&self) -> Result<Vec<f64>, EnvError> {
        let ep = self.ep()?;
        Ok(ep.cumulative.iter().map(|c| (ep.demand_suts - c).max(0.0)).collect())
    }

    pub fn slot(&self) -> Result<u64, EnvError> {
        Ok(self.ep()?.slot)
    }

    pub fn is_done(&self) -> bool {
        self.episode
            .as_ref()
            .is_some_and(|ep| ep.slot >= u64::from(self.spec.slots_per_episode()))
    }

    /// Evaluates the current slot for decoded actions without advancing.
    pub fn evaluate(&self, actions: &[AgentAction]) -> Result<SlotOutcome, EnvError> {
        let ep = self.ep()?;
        self.check_actions(actions)?;
        Ok(super::evaluate_slot(
            &self.spec.slot_params(ep.demand_suts),
            &self.surrogate,
            &ep.topology.platoons,
            &ep.profiles,
            &ep.realization,
            actions,
        ))
    }

    fn check_actions(&self, actions: &[AgentAction]) -> Result<(), EnvError> {
        let n = self.spec.num_agents();
        if actions.len() != n {
            return Err(EnvError::AgentCount { expected: n, got: actions.len() });
        }
        let layout = self.spec.action_layout();
        if let Some(i) = actions.iter().position(|a| !layout.is_feasible(a)) {
            return Err(EnvError::Infeasible(i));
        }
        Ok(())
    }

    /// Decodes raw actor outputs and advances one slot.
    pub fn step(&mut self, raw: &[Vec<f64>]) -> Result<StepResult, EnvError> {
        let n = self.spec.num_agents();
        if raw.len() != n {
            return Err(EnvError::AgentCount { expected: n, got: raw.len() });
        }
        let layout = self.spec.action_layout();
        let mut actions = Vec::with_capacity(n);
        let mut clipped = 0;
        for r in raw {
            let (a, c) = decode_action(r, &layout)?;
            actions.push(a);
            clipped += c;
        }
        self.step_decoded(actions, clipped)
    }

    /// Advances one slot with already-decoded actions.
    pub fn step_decoded(&mut self, actions: Vec<AgentAction>, clipped: usize) -> Result<StepResult, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeDone);
        }
        let outcome = self.evaluate(&actions)?;
        let sc = self.spec.scenario.clone();
        let slots = u64::from(self.spec.slots_per_episode());
        let ep = self.episode.as_mut().expect("checked by evaluate");

        let txs = transmissions(&ep.topology.platoons, &actions);
        for (n, platoon) in ep.topology.platoons.iter().enumerate() {
            ep.prev_interference[n] = interference_features(&txs, &ep.realization, platoon, n);
            let d = outcome.platoons[n].delivered_suts;
            ep.delivered[n].push(d);
            ep.cumulative[n] += d;
        }
        ep.reward_sum += outcome.global_reward;
        ep.qoe_sum += outcome.platoons.iter().map(|p| p.qoe).sum::<f64>() / outcome.platoons.len() as f64;
        ep.collisions += outcome.collisions as u64;
        ep.score_violations += outcome.score_violations as u64;
        ep.clipped += clipped as u64;

        let slot = ep.slot;
        ep.slot += 1;
        ep.topology = advance_mobility(&ep.topology, sc.slot_s());
        let period_slots = u64::from(sc.large_scale_period_ms / sc.slot_ms);
        if ep.slot % period_slots == 0 {
            let moved = sc.speed_mps() * f64::from(sc.large_scale_period_ms) * 1e-3;
            ep.channel.refresh_large_scale(&ep.topology, moved);
        }
        ep.channel.redraw_fast_fading();
        ep.realization = ep.channel.realization(ep.slot);
        let done = ep.slot >= slots;

        let observations = self.observations()?;
        Ok(StepResult {
            observations,
            local_rewards: outcome.platoons.iter().map(|p| p.local_reward).collect(),
            global_reward: outcome.global_reward,
            done,
            info: StepInfo { slot, actions, outcome, clipped },
        })
    }

    /// Metrics of the episode so far.
    pub fn episode_metrics(&self) -> Result<EpisodeMetrics, EnvError> {
        let ep = self.ep()?;
        let n = ep.cumulative.len() as f64;
        let slot_ms = f64::from(self.spec.scenario.slot_ms);
        let window_ms = f64::from(self.spec.semantic.window_ms);
        let srs = ep.cumulative.iter().filter(|&&c| c >= ep.demand_suts).count() as f64 / n;
        let delay_ms = ep
            .delivered
            .iter()
            .map(|d| measure_delay(d, ep.demand_suts, slot_ms, window_ms))
            .sum::<f64>()
            / n;
        Ok(EpisodeMetrics {
            reward: ep.reward_sum,
            qoe: if ep.slot > 0 { ep.qoe_sum / ep.slot as f64 } else { 0.0 },
            srs,
            delay_ms,
            violations_21c: ep.collisions,
            violations_21h: ep.score_violations,
            clipped_actions: ep.clipped,
        })
    }
}

//! Single-slot physics and scoring: interference, SINR, similarity, rates,
//! QoE, the delivery logistic and rewards for one joint action.

use serde::{Deserialize, Serialize};

use super::{AgentAction, CommMode, DeliveryGate, RewardForm};
use crate::channel::{compute_interference, compute_sinr, ChannelRealization, ReceiverKind, Transmission};
use crate::semantics::{
    qoe_member, qoe_traditional, semantic_rate, srs_logistic, MemberQuality, QoEProfile, RateSample,
    SimilaritySurrogate,
};

/// How the members of one platoon are grouped for the slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingPlan {
    /// Member indices (0-based, platoon order) exchanging multi-modal data.
    pub pairs: Vec<(usize, usize)>,
    /// The last member when the count is odd; it uses single-modal text.
    pub single: Option<usize>,
}

impl PairingPlan {
    pub fn is_multimodal(&self, member: usize) -> bool {
        self.single != Some(member)
    }

    /// Number of streams sharing the subchannel: two per paired member, one
    /// for the single-modal member.
    pub fn streams(&self) -> usize {
        4 * self.pairs.len() + usize::from(self.single.is_some())
    }
}

pub fn pair_members(count: usize) -> PairingPlan {
    PairingPlan {
        pairs: (0..count / 2).map(|i| (2 * i, 2 * i + 1)).collect(),
        single: (count % 2 == 1).then(|| count - 1),
    }
}

/// Scalar parameters of the slot model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotParams {
    pub bandwidth_hz: f64,
    pub slot_s: f64,
    pub window_s: f64,
    pub demand_suts: f64,
    pub entropy_sm: f64,
    pub entropy_mm_text: f64,
    pub entropy_mm_image: f64,
    pub logistic_alpha: f64,
    pub objective_lambda: f64,
    pub reward_w1: f64,
    pub reward_w2: f64,
    pub qoe_threshold: f64,
    pub transform_factor_bits: f64,
    pub v2i_default_u: u32,
    pub reward_form: RewardForm,
    pub delivery_gate: DeliveryGate,
    pub mode: CommMode,
}

/// What one receiver (member, or the base station for V2I) experienced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverOutcome {
    pub node: usize,
    pub multimodal: bool,
    pub sinr_text: f64,
    pub sinr_image: f64,
    pub similarity: f64,
    /// Text (or only) stream rate, ksuts/s.
    pub rate_text_ksuts: f64,
    /// Image stream rate, ksuts/s; 0 for single-modal receivers.
    pub rate_image_ksuts: f64,
    pub score_rate: f64,
    pub score_accuracy: f64,
    pub qoe: f64,
    /// Whether this receiver's streams counted towards delivery.
    pub delivered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonOutcome {
    pub receivers: Vec<ReceiverOutcome>,
    pub qoe: f64,
    /// Intra-platoon delivery rate after time sharing, ksuts/s.
    pub delivery_rate_ksuts: f64,
    /// Suts delivered in the slot before any residual clipping.
    pub delivered_suts: f64,
    pub logistic: f64,
    pub local_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub platoons: Vec<PlatoonOutcome>,
    pub global_reward: f64,
    /// `sum_n QoE_n + lambda * sum_n logistic_n`.
    pub objective: f64,
    /// Subchannels carrying two or more platoons.
    pub collisions: usize,
    /// Receivers whose rate or accuracy score fell below the threshold.
    pub score_violations: usize,
}

fn stream_u(params: &SlotParams, u: u32) -> f64 {
    match params.mode {
        CommMode::Semantic => f64::from(u),
        CommMode::Bits => params.transform_factor_bits,
    }
}

fn rate_ksuts(params: &SlotParams, entropy: f64, u: f64) -> f64 {
    let r = match params.mode {
        CommMode::Semantic => semantic_rate(params.bandwidth_hz, entropy, u),
        CommMode::Bits => qoe_traditional(params.bandwidth_hz, entropy, u),
    };
    r / 1000.0
}

/// Evaluates one slot for every platoon.
///
/// `platoons[n]` lists node ids with the leader first; `profiles[n]` holds one
/// profile per vehicle in the same order.
pub fn evaluate_slot(
    params: &SlotParams,
    surrogate: &SimilaritySurrogate,
    platoons: &[Vec<usize>],
    profiles: &[Vec<QoEProfile>],
    realization: &ChannelRealization,
    actions: &[AgentAction],
) -> SlotOutcome {
    let transmissions = transmissions(platoons, actions);
    let noise = realization.noise_w;
    let similarity_sm = |u: f64, sinr: f64| match params.mode {
        CommMode::Semantic => surrogate.similarity_sm(u, sinr),
        CommMode::Bits => 1.0,
    };

    let mut out = Vec::with_capacity(platoons.len());
    for (n, (vehicles, action)) in platoons.iter().zip(actions).enumerate() {
        let leader = vehicles[0];
        let k = action.subchannel;
        let mut receivers = Vec::new();
        let mut stream_rate_sum = 0.0;
        let mut streams = 0usize;
        if action.v2v {
            let plan = pair_members(vehicles.len() - 1);
            for (j, &node) in vehicles[1..].iter().enumerate() {
                let g = realization.gain(leader, node, k);
                let i = compute_interference(&transmissions, realization, n, ReceiverKind::Vehicle(node), k);
                let sinr_text = compute_sinr(action.power_text_w, g, i, noise);
                let sinr_image = compute_sinr(action.power_image_w, g, i, noise);
                let profile = &profiles[n][j + 1];
                let u_t = stream_u(params, action.u_text[j]);
                let r = if plan.is_multimodal(j) {
                    let u_i = stream_u(params, action.u_image[j]);
                    let similarity = match params.mode {
                        CommMode::Semantic => surrogate.similarity_mm(u_t, u_i, sinr_text, sinr_image),
                        CommMode::Bits => 1.0,
                    };
                    let text = rate_ksuts(params, params.entropy_mm_text, u_t);
                    let image = rate_ksuts(params, params.entropy_mm_image, u_i);
                    receiver(profile, node, true, sinr_text, sinr_image, similarity, text, image)
                } else {
                    let similarity = similarity_sm(u_t, sinr_text);
                    let text = rate_ksuts(params, params.entropy_sm, u_t);
                    receiver(profile, node, false, sinr_text, 0.0, similarity, text, 0.0)
                };
                let delivered = match params.delivery_gate {
                    DeliveryGate::Unconditional => true,
                    DeliveryGate::SimilarityTarget => r.similarity >= profile.similarity_target,
                };
                let r = ReceiverOutcome { delivered, ..r };
                if r.multimodal {
                    streams += 2;
                    if delivered {
                        stream_rate_sum += r.rate_text_ksuts + r.rate_image_ksuts;
                    }
                } else {
                    streams += 1;
                    if delivered {
                        stream_rate_sum += r.rate_text_ksuts;
                    }
                }
                receivers.push(r);
            }
        } else {
            let bs = realization.bs_node();
            let g = realization.gain(leader, bs, k);
            let i = compute_interference(&transmissions, realization, n, ReceiverKind::BaseStation, k);
            let sinr_text = compute_sinr(action.power_text_w, g, i, noise);
            let u = action.u_text.first().copied().unwrap_or(params.v2i_default_u);
            let u_t = stream_u(params, u);
            let similarity = similarity_sm(u_t, sinr_text);
            let text = rate_ksuts(params, params.entropy_sm, u_t);
            let r = receiver(&profiles[n][0], bs, false, sinr_text, 0.0, similarity, text, 0.0);
            receivers.push(ReceiverOutcome { delivered: false, ..r });
        }
        let qoe: f64 = receivers.iter().map(|r| r.qoe).sum();
        let delivery_rate_ksuts = if streams > 0 { stream_rate_sum / streams as f64 } else { 0.0 };
        let delivered_suts = delivery_rate_ksuts * 1000.0 * params.slot_s;
        let logistic = srs_logistic(
            delivery_rate_ksuts,
            params.demand_suts / 1000.0,
            params.window_s,
            params.logistic_alpha,
        );
        let sign = match params.reward_form {
            RewardForm::Positive => 1.0,
            RewardForm::Paper => -1.0,
        };
        let local_reward = sign * params.reward_w1 * logistic + params.reward_w2 * qoe;
        out.push(PlatoonOutcome { receivers, qoe, delivery_rate_ksuts, delivered_suts, logistic, local_reward });
    }

    let global_reward = out.iter().map(|p| p.local_reward).sum::<f64>() / out.len() as f64;
    let objective = out.iter().map(|p| p.qoe).sum::<f64>()
        + params.objective_lambda * out.iter().map(|p| p.logistic).sum::<f64>();
    let num_k = realization.num_subchannels;
    let collisions = (0..num_k)
        .filter(|&k| actions.iter().filter(|a| a.subchannel == k).count() >= 2)
        .count();
    let score_violations = out
        .iter()
        .flat_map(|p| &p.receivers)
        .filter(|r| r.score_rate < params.qoe_threshold || r.score_accuracy < params.qoe_threshold)
        .count();
    SlotOutcome { platoons: out, global_reward, objective, collisions, score_violations }
}

#[allow(clippy::too_many_arguments)]
fn receiver(
    profile: &QoEProfile,
    node: usize,
    multimodal: bool,
    sinr_text: f64,
    sinr_image: f64,
    similarity: f64,
    text: f64,
    image: f64,
) -> ReceiverOutcome {
    let rate = if multimodal { RateSample::Dual { text, image } } else { RateSample::Single(text) };
    let (qoe, score_rate, score_accuracy) = qoe_member(profile, &MemberQuality { rate, similarity });
    ReceiverOutcome {
        node,
        multimodal,
        sinr_text,
        sinr_image,
        similarity,
        rate_text_ksuts: text,
        rate_image_ksuts: image,
        score_rate,
        score_accuracy,
        qoe,
        delivered: true,
    }
}

/// One [`Transmission`] per platoon leader.
pub fn transmissions(platoons: &[Vec<usize>], actions: &[AgentAction]) -> Vec<Transmission> {
    platoons
        .iter()
        .zip(actions)
        .map(|(v, a)| Transmission {
            tx_node: v[0],
            subchannel: a.subchannel,
            v2v: a.v2v,
            power_text_w: a.power_text_w,
            power_image_w: a.power_image_w,
        })
        .collect()
}

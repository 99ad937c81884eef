use serde::{Deserialize, Serialize};

use super::{OracleError, StaticInstance};
use crate::env::{AgentAction, CommMode, DeliveryGate};

/// Constraint bookkeeping for one assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    /// Subchannels carrying two or more platoons.
    pub collisions: usize,
    /// Receivers with a rate or accuracy score under the threshold.
    pub score: usize,
    /// Agents outside the power box.
    pub power: usize,
    /// Symbol lengths outside `[1, u_max]`.
    pub symbol_length: usize,
    /// V2I agents radiating image power.
    pub v2i_image: usize,
    /// Summed payload above the configured cap.
    pub demand_cap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub total: f64,
    pub qoe: Vec<f64>,
    pub logistic: Vec<f64>,
    pub violations: Violations,
}

struct Member {
    qoe: f64,
    rate_sum: f64,
    streams: usize,
    score_low: bool,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Objective with fractional subchannel weights `beta[n][k]`.
///
/// Interference from platoon `n'` on subchannel `k` is scaled by
/// `beta[n'][k]`; a platoon's QoE and delivery rate are `beta`-weighted sums
/// over subchannels. One-hot rows give the discrete objective exactly.
pub(crate) fn weighted_objective(inst: &StaticInstance, beta: &[Vec<f64>], actions: &[AgentAction]) -> Breakdown {
    let p = &inst.params;
    let r = &inst.realization;
    let sur = inst.surrogate();
    let bs = r.bs_node();
    let kk = r.num_subchannels;
    let n_agents = inst.platoons.len();
    let bits = p.mode == CommMode::Bits;
    let u_of = |u: u32| if bits { p.transform_factor_bits } else { f64::from(u) };
    let sim = |u: f64, s: f64| if bits { 1.0 } else { sur.similarity_sm(u, s) };
    let ksuts = |h: f64, u: f64| p.bandwidth_hz * h / u / 1000.0;

    let interference_at = |own: usize, rx: Option<usize>, k: usize| {
        let mut acc = 0.0;
        for m in 0..n_agents {
            let w = beta[m][k];
            if m == own || w == 0.0 {
                continue;
            }
            let a = &actions[m];
            let tx = inst.platoons[m][0];
            match rx {
                Some(v) if a.v2v => acc += w * ((a.power_text_w + a.power_image_w) * r.gain(tx, v, k)),
                None if !a.v2v => acc += w * (a.power_text_w * r.gain(tx, bs, k)),
                _ => {}
            }
        }
        acc
    };

    let mut qoe = Vec::with_capacity(n_agents);
    let mut logistic = Vec::with_capacity(n_agents);
    let mut v = Violations::default();
    for (n, a) in actions.iter().enumerate() {
        let vehicles = &inst.platoons[n];
        let prof = &inst.profiles[n];
        let leader = vehicles[0];
        let receivers = vehicles.len() - 1;
        let mut q_n = 0.0;
        let mut rate_n = 0.0;
        let mut low_n = 0usize;
        for k in 0..kk {
            let w = beta[n][k];
            if w == 0.0 {
                continue;
            }
            let mut members: Vec<Member> = Vec::new();
            if a.v2v {
                for j in 0..receivers {
                    let node = vehicles[j + 1];
                    let pr = &prof[j + 1];
                    let g = r.gain(leader, node, k);
                    let denom = interference_at(n, Some(node), k) + r.noise_w;
                    let s_t = a.power_text_w * g / denom;
                    let u_t = u_of(a.u_text[j]);
                    let paired = !(receivers % 2 == 1 && j == receivers - 1);
                    let (score_r, similarity, rate_sum, streams) = if paired {
                        let s_i = a.power_image_w * g / denom;
                        let u_i = u_of(a.u_image[j]);
                        let similarity = (sim(u_t, s_t) * sim(u_i, s_i)).sqrt();
                        let rt = ksuts(p.entropy_mm_text, u_t);
                        let ri = ksuts(p.entropy_mm_image, u_i);
                        let sr = 0.5
                            * (sigmoid(pr.gamma * (rt - pr.rate_target_text_ksuts))
                                + sigmoid(pr.gamma * (ri - pr.rate_target_image_ksuts)));
                        (sr, similarity, rt + ri, 2)
                    } else {
                        let rt = ksuts(p.entropy_sm, u_t);
                        (sigmoid(pr.gamma * (rt - pr.rate_target_text_ksuts)), sim(u_t, s_t), rt, 1)
                    };
                    let score_a = sigmoid(pr.delta * (similarity - pr.similarity_target));
                    let counts = match p.delivery_gate {
                        DeliveryGate::Unconditional => true,
                        DeliveryGate::SimilarityTarget => similarity >= pr.similarity_target,
                    };
                    members.push(Member {
                        qoe: pr.omega * score_r + (1.0 - pr.omega) * score_a,
                        rate_sum: if counts { rate_sum } else { 0.0 },
                        streams,
                        score_low: score_r < p.qoe_threshold || score_a < p.qoe_threshold,
                    });
                }
            } else {
                let pr = &prof[0];
                let s_t = a.power_text_w * r.gain(leader, bs, k) / (interference_at(n, None, k) + r.noise_w);
                let u_t = u_of(a.u_text.first().copied().unwrap_or(p.v2i_default_u));
                let score_r = sigmoid(pr.gamma * (ksuts(p.entropy_sm, u_t) - pr.rate_target_text_ksuts));
                let score_a = sigmoid(pr.delta * (sim(u_t, s_t) - pr.similarity_target));
                members.push(Member {
                    qoe: pr.omega * score_r + (1.0 - pr.omega) * score_a,
                    rate_sum: 0.0,
                    streams: 0,
                    score_low: score_r < p.qoe_threshold || score_a < p.qoe_threshold,
                });
            }
            let q_k: f64 = members.iter().map(|m| m.qoe).sum();
            let streams: usize = members.iter().map(|m| m.streams).sum();
            let rate_k = if streams == 0 {
                0.0
            } else {
                members.iter().map(|m| m.rate_sum).sum::<f64>() / streams as f64
            };
            q_n += w * q_k;
            rate_n += w * rate_k;
            if w == 1.0 {
                low_n = members.iter().filter(|m| m.score_low).count();
            }
        }
        let need = p.demand_suts / 1000.0 / p.window_s;
        qoe.push(q_n);
        logistic.push(sigmoid(p.logistic_alpha * (rate_n - need)));
        v.score += low_n;

        let p_sum = a.power_text_w + a.power_image_w;
        if a.power_text_w < 0.0 || a.power_image_w < 0.0 || p_sum > inst.max_power_w * (1.0 + 1e-12) {
            v.power += 1;
        }
        let bad_u = |u: &u32, max: u32| *u < 1 || *u > max;
        v.symbol_length += a.u_text.iter().filter(|u| bad_u(u, inst.u_max_text)).count();
        v.symbol_length += a.u_image.iter().filter(|u| bad_u(u, inst.u_max_image)).count();
        if !a.v2v && a.power_image_w > 0.0 {
            v.v2i_image += 1;
        }
    }
    for k in 0..kk {
        if actions.iter().filter(|a| a.subchannel == k).count() >= 2 {
            v.collisions += 1;
        }
    }
    if let Some(cap) = inst.demand_cap_suts {
        v.demand_cap = p.demand_suts * n_agents as f64 > cap;
    }
    let total = qoe.iter().sum::<f64>() + p.objective_lambda * logistic.iter().sum::<f64>();
    Breakdown { total, qoe, logistic, violations: v }
}

pub(crate) fn one_hot(actions: &[AgentAction], k: usize) -> Vec<Vec<f64>> {
    actions
        .iter()
        .map(|a| (0..k).map(|j| if j == a.subchannel { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn check_shape(inst: &StaticInstance, actions: &[AgentAction]) -> Result<(), OracleError> {
    if actions.len() != inst.num_agents() {
        return Err(OracleError::Shape(format!("{} actions for {} agents", actions.len(), inst.num_agents())));
    }
    let members = inst.platoon_size() - 1;
    for (n, a) in actions.iter().enumerate() {
        if a.subchannel >= inst.num_subchannels() {
            return Err(OracleError::Shape(format!("agent {n}: subchannel {} out of range", a.subchannel)));
        }
        if a.u_text.len() != members || a.u_image.len() != members {
            return Err(OracleError::Shape(format!("agent {n}: expected {members} symbol lengths per modality")));
        }
    }
    Ok(())
}

/// Objective of an assignment drawn from the instance grids.
pub fn evaluate_objective(inst: &StaticInstance, actions: &[AgentAction]) -> Result<Breakdown, OracleError> {
    check_shape(inst, actions)?;
    let on_power = |p: f64| inst.power_levels_w.contains(&p);
    let on_u = |u: &u32| inst.u_grid.contains(u);
    for (n, a) in actions.iter().enumerate() {
        if !on_power(a.power_text_w) {
            return Err(OracleError::OffGrid { agent: n, field: "power_text_w" });
        }
        if !on_power(a.power_image_w) {
            return Err(OracleError::OffGrid { agent: n, field: "power_image_w" });
        }
        if !a.u_text.iter().all(on_u) {
            return Err(OracleError::OffGrid { agent: n, field: "u_text" });
        }
        if !a.u_image.iter().all(on_u) {
            return Err(OracleError::OffGrid { agent: n, field: "u_image" });
        }
    }
    Ok(weighted_objective(inst, &one_hot(actions, inst.num_subchannels()), actions))
}

/// Objective of any well-shaped assignment, such as a decoded policy action.
pub fn evaluate_unchecked(inst: &StaticInstance, actions: &[AgentAction]) -> Result<Breakdown, OracleError> {
    check_shape(inst, actions)?;
    Ok(weighted_objective(inst, &one_hot(actions, inst.num_subchannels()), actions))
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{one_hot, weighted_objective};
use super::{Breakdown, OracleError, StaticInstance};
use crate::env::{pair_members, AgentAction, CommMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub value: f64,
    pub assignment: Vec<AgentAction>,
    pub breakdown: Breakdown,
    /// Joint assignments evaluated.
    pub evaluated: u64,
}

/// Grid decisions for one agent in canonical order, with variables that
/// cannot affect the objective pinned to the first grid value.
pub fn agent_candidates(inst: &StaticInstance) -> Vec<AgentAction> {
    let members = inst.platoon_size() - 1;
    let plan = pair_members(members);
    let u0 = inst.u_grid[0];
    let bits = inst.params.mode == CommMode::Bits;
    let u_choices: &[u32] = if bits { &inst.u_grid[..1] } else { &inst.u_grid };
    let cap = inst.max_power_w * (1.0 + 1e-12);
    let mut out = Vec::new();
    for k in 0..inst.num_subchannels() {
        for v2v in [true, false] {
            for &pt in &inst.power_levels_w {
                for &pi in &inst.power_levels_w {
                    if pt + pi > cap || (!v2v && pi != 0.0) {
                        continue;
                    }
                    // Free symbol-length slots: text for every member, image for
                    // paired members; V2I only reads the first text length.
                    let mut free: Vec<(bool, usize)> = Vec::new();
                    if v2v {
                        free.extend((0..members).map(|j| (true, j)));
                        free.extend((0..members).filter(|&j| plan.is_multimodal(j)).map(|j| (false, j)));
                    } else if members > 0 {
                        free.push((true, 0));
                    }
                    let mut idx = vec![0usize; free.len()];
                    loop {
                        let mut a = AgentAction {
                            subchannel: k,
                            v2v,
                            power_text_w: pt,
                            power_image_w: pi,
                            u_text: vec![u0; members],
                            u_image: vec![u0; members],
                        };
                        for (&(text, j), &i) in free.iter().zip(&idx) {
                            if text {
                                a.u_text[j] = u_choices[i];
                            } else {
                                a.u_image[j] = u_choices[i];
                            }
                        }
                        out.push(a);
                        if !advance(&mut idx, u_choices.len()) {
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Lexicographic odometer, last digit fastest. Returns false on wrap-around.
fn advance(idx: &mut [usize], radix: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Exhaustive search over the joint grid. Ties keep the lexicographically
/// first assignment (agent 0 most significant).
pub fn enumerate_optimum(inst: &StaticInstance) -> Result<Optimum, OracleError> {
    inst.validate()?;
    let cands = agent_candidates(inst);
    let n = inst.num_agents();
    let per = cands.len() as u64;
    let total = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(per));
    match total {
        Some(t) if t <= inst.enumeration_cap => {}
        _ => {
            return Err(OracleError::TooLarge {
                per_agent: per,
                agents: n,
                cap: inst.enumeration_cap,
            })
        }
    }
    let k = inst.num_subchannels();
    let best = (0..cands.len())
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut count = 0u64;
            loop {
                let joint: Vec<AgentAction> = idx.iter().map(|&i| cands[i].clone()).collect();
                let value = weighted_objective(inst, &one_hot(&joint, k), &joint).total;
                count += 1;
                if value.is_finite() && best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, idx.clone()));
                }
                if !advance(&mut idx[1..], cands.len()) {
                    break;
                }
            }
            (best, count)
        })
        .collect::<Vec<_>>();
    let evaluated = best.iter().map(|(_, c)| c).sum();
    let mut winner: Option<(f64, Vec<usize>)> = None;
    for (b, _) in best.into_iter() {
        if let Some((v, idx)) = b {
            if winner.as_ref().is_none_or(|(w, _)| v > *w) {
                winner = Some((v, idx));
            }
        }
    }
    let (value, idx) = winner.ok_or(OracleError::NoFiniteValue)?;
    let assignment: Vec<AgentAction> = idx.iter().map(|&i| cands[i].clone()).collect();
    let breakdown = weighted_objective(inst, &one_hot(&assignment, k), &assignment);
    Ok(Optimum { value, assignment, breakdown, evaluated })
}

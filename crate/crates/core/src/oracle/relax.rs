use serde::{Deserialize, Serialize};

use super::objective::{one_hot, weighted_objective};
use super::{OracleError, StaticInstance};
use crate::env::AgentAction;

/// How fractional subchannel weights become a single subchannel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Largest weight, lowest index on ties.
    #[default]
    Argmax,
    /// First weight at or above one half, falling back to the argmax.
    Half,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationReport {
    pub relaxed: f64,
    pub thresholded: f64,
    /// `relaxed - thresholded`.
    pub gap: f64,
    pub subchannels: Vec<usize>,
}

pub fn threshold(row: &[f64], rule: ThresholdRule) -> usize {
    let argmax = row
        .iter()
        .enumerate()
        .fold(0, |best, (k, &w)| if w > row[best] { k } else { best });
    match rule {
        ThresholdRule::Argmax => argmax,
        ThresholdRule::Half => row.iter().position(|&w| w >= 0.5).unwrap_or(argmax),
    }
}

/// Compares the objective under fractional subchannel weights with the
/// objective after thresholding them. Other decisions come from `actions`.
pub fn relaxation_gap(
    inst: &StaticInstance,
    beta: &[Vec<f64>],
    actions: &[AgentAction],
    rule: ThresholdRule,
) -> Result<RelaxationReport, OracleError> {
    let k = inst.num_subchannels();
    if beta.len() != inst.num_agents() || actions.len() != inst.num_agents() {
        return Err(OracleError::Shape("one weight row and one action per agent required".into()));
    }
    for (n, row) in beta.iter().enumerate() {
        if row.len() != k {
            return Err(OracleError::Shape(format!("agent {n}: {} weights for {k} subchannels", row.len())));
        }
        let sum: f64 = row.iter().sum();
        if row.iter().any(|w| !(0.0..=1.0).contains(w)) || sum > 1.0 + 1e-9 {
            return Err(OracleError::Shape(format!("agent {n}: weights must lie in [0, 1] and sum to at most 1")));
        }
    }
    let relaxed = weighted_objective(inst, beta, actions).total;
    let subchannels: Vec<usize> = beta.iter().map(|r| threshold(r, rule)).collect();
    let fixed: Vec<AgentAction> = actions
        .iter()
        .zip(&subchannels)
        .map(|(a, &s)| AgentAction { subchannel: s, ..a.clone() })
        .collect();
    let thresholded = weighted_objective(inst, &one_hot(&fixed, k), &fixed).total;
    Ok(RelaxationReport { relaxed, thresholded, gap: relaxed - thresholded, subchannels })
}

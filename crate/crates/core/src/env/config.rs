use serde::{Deserialize, Serialize};

use super::EnvError;

/// Sign of the delivery term in the local reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardForm {
    /// `+w1 * logistic + w2 * QoE`, consistent with the maximisation objective.
    #[default]
    Positive,
    /// `-w1 * logistic + w2 * QoE`.
    Paper,
}

/// Whether delivered payload depends on semantic similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryGate {
    /// Every active stream delivers at its semantic rate.
    #[default]
    Unconditional,
    /// A stream only delivers when its receiver's similarity reaches the
    /// receiver's similarity target.
    SimilarityTarget,
}

/// Semantic transceivers, or plain bit transmission with a fixed transform
/// factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommMode {
    #[default]
    Semantic,
    Bits,
}

/// Environment section of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Slots per episode; `None` uses one delivery window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slots_per_episode: Option<u32>,
    pub reward_form: RewardForm,
    pub delivery_gate: DeliveryGate,
    pub mode: CommMode,
    /// Text symbol length used on a V2I link when the platoon has no members
    /// to take it from.
    pub v2i_default_u: u32,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            slots_per_episode: None,
            reward_form: RewardForm::Positive,
            delivery_gate: DeliveryGate::Unconditional,
            mode: CommMode::Semantic,
            v2i_default_u: 10,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.slots_per_episode == Some(0) {
            return Err(EnvError::Invalid("env.slots_per_episode: must be at least 1".into()));
        }
        if self.v2i_default_u == 0 {
            return Err(EnvError::Invalid("env.v2i_default_u: must be at least 1".into()));
        }
        Ok(())
    }
}

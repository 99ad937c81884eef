//! Mapping from actor outputs in `[-1, 1]^d` to platoon-leader decisions.
//!
//! Layout of a raw action for `K` subchannels and platoon size `M`:
//! `K` subchannel logits, one link-type entry, text power, image power,
//! `M - 1` text symbol lengths and `M - 1` image symbol lengths.

use serde::{Deserialize, Serialize};

use super::EnvError;

/// One platoon leader's decoded decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAction {
    pub subchannel: usize,
    /// `rho`: true for intra-platoon V2V, false for V2I.
    pub v2v: bool,
    pub power_text_w: f64,
    pub power_image_w: f64,
    /// Per-member symbol lengths, suts/word, member order.
    pub u_text: Vec<u32>,
    pub u_image: Vec<u32>,
}

/// Sizes and bounds needed to decode a raw action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionLayout {
    pub num_subchannels: usize,
    pub platoon_size: usize,
    pub max_power_w: f64,
    pub u_max_text: u32,
    pub u_max_image: u32,
}

impl ActionLayout {
    pub fn members(&self) -> usize {
        self.platoon_size - 1
    }

    pub fn dim(&self) -> usize {
        action_dim(self.num_subchannels, self.platoon_size)
    }

    pub fn power_offset(&self) -> usize {
        self.num_subchannels + 1
    }

    pub fn u_text_offset(&self) -> usize {
        self.num_subchannels + 3
    }

    pub fn u_image_offset(&self) -> usize {
        self.num_subchannels + 3 + self.members()
    }

    /// Whether a decoded action respects the power box, the text-only V2I
    /// rule, the symbol-length bounds and single-subchannel selection.
    pub fn is_feasible(&self, a: &AgentAction) -> bool {
        let p_ok = a.power_text_w >= 0.0
            && a.power_image_w >= 0.0
            && a.power_text_w + a.power_image_w <= self.max_power_w * (1.0 + 1e-12);
        let u_ok = a.u_text.len() == self.members()
            && a.u_image.len() == self.members()
            && a.u_text.iter().all(|&u| (1..=self.u_max_text).contains(&u))
            && a.u_image.iter().all(|&u| (1..=self.u_max_image).contains(&u));
        p_ok && u_ok && a.subchannel < self.num_subchannels && (a.v2v || a.power_image_w == 0.0)
    }
}

/// `K + 1 + 2 + 2 (M - 1)`.
pub fn action_dim(num_subchannels: usize, platoon_size: usize) -> usize {
    num_subchannels + 3 + 2 * platoon_size.saturating_sub(1)
}

fn to_unit(x: f64) -> f64 {
    (x + 1.0) / 2.0
}

fn decode_u(x: f64, u_max: u32) -> u32 {
    let v = 1.0 + to_unit(x) * f64::from(u_max - 1);
    ((v + 0.5).floor() as u32).clamp(1, u_max)
}

/// Decodes `raw`, returning the action and the number of entries that had to
/// be clipped into `[-1, 1]` (non-finite entries count and are read as 0).
pub fn decode_action(raw: &[f64], layout: &ActionLayout) -> Result<(AgentAction, usize), EnvError> {
    if raw.len() != layout.dim() {
        return Err(EnvError::ActionDim { expected: layout.dim(), got: raw.len() });
    }
    let mut clipped = 0;
    let x: Vec<f64> = raw
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                clipped += 1;
                0.0
            } else if !(-1.0..=1.0).contains(&v) {
                clipped += 1;
                v.clamp(-1.0, 1.0)
            } else {
                v
            }
        })
        .collect();

    let k = layout.num_subchannels;
    let mut subchannel = 0;
    for (i, &v) in x[..k].iter().enumerate() {
        if v > x[subchannel] {
            subchannel = i;
        }
    }
    let v2v = x[k] >= 0.0;
    let p = layout.power_offset();
    let mut power_text_w = to_unit(x[p]) * layout.max_power_w;
    let mut power_image_w = if v2v { to_unit(x[p + 1]) * layout.max_power_w } else { 0.0 };
    let total = power_text_w + power_image_w;
    if total > layout.max_power_w {
        let scale = layout.max_power_w / total;
        power_text_w *= scale;
        power_image_w *= scale;
    }
    let m = layout.members();
    let ut = layout.u_text_offset();
    let ui = layout.u_image_offset();
    let u_text = x[ut..ut + m].iter().map(|&v| decode_u(v, layout.u_max_text)).collect();
    let u_image = x[ui..ui + m].iter().map(|&v| decode_u(v, layout.u_max_image)).collect();
    Ok((AgentAction { subchannel, v2v, power_text_w, power_image_w, u_text, u_image }, clipped))
}

/// Raw vector that decodes to `action` (used for scripted policies and
/// tests). Powers and symbol lengths are inverted through the affine maps.
pub fn encode_action(action: &AgentAction, layout: &ActionLayout) -> Vec<f64> {
    let mut raw = vec![-1.0; layout.dim()];
    let k = layout.num_subchannels;
    raw[action.subchannel] = 1.0;
    raw[k] = if action.v2v { 1.0 } else { -1.0 };
    let p = layout.power_offset();
    raw[p] = 2.0 * action.power_text_w / layout.max_power_w - 1.0;
    raw[p + 1] = 2.0 * action.power_image_w / layout.max_power_w - 1.0;
    let enc = |u: u32, u_max: u32| {
        if u_max == 1 {
            0.0
        } else {
            2.0 * f64::from(u - 1) / f64::from(u_max - 1) - 1.0
        }
    };
    for (j, &u) in action.u_text.iter().enumerate() {
        raw[layout.u_text_offset() + j] = enc(u, layout.u_max_text);
    }
    for (j, &u) in action.u_image.iter().enumerate() {
        raw[layout.u_image_offset() + j] = enc(u, layout.u_max_image);
    }
    raw
}

//! Per-agent state vectors.
//!
//! Layout for `K` subchannels and platoon size `M`: leader-to-BS gains (`K`),
//! leader-to-member gains (`(M - 1) K`, member-major), previous-slot
//! interference at each member (`(M - 1) K`), previous-slot interference at
//! the BS (`K`), residual payload (1). All normalisations are fixed affine
//! maps of dB quantities.

use crate::channel::{compute_interference, ChannelRealization, ReceiverKind, Transmission};

const GAIN_DB_FLOOR: f64 = -200.0;
const GAIN_DB_OFFSET: f64 = 90.0;
const DB_SCALE: f64 = 30.0;
/// Residual payload scale, suts.
pub const RESIDUAL_SCALE: f64 = 10_000.0;

pub fn observation_dim(num_subchannels: usize, platoon_size: usize) -> usize {
    let m = platoon_size.saturating_sub(1);
    num_subchannels + num_subchannels * m + m * num_subchannels + num_subchannels + 1
}

pub fn normalize_gain(g: f64) -> f64 {
    let db = if g > 0.0 { (10.0 * g.log10()).max(GAIN_DB_FLOOR) } else { GAIN_DB_FLOOR };
    (db + GAIN_DB_OFFSET) / DB_SCALE
}

/// Interference-to-noise ratio in dB over `1 + I / sigma^2`, scaled.
pub fn normalize_interference(i_w: f64, noise_w: f64) -> f64 {
    10.0 * (1.0 + i_w / noise_w).log10() / DB_SCALE
}

pub fn normalize_residual(suts: f64) -> f64 {
    suts / RESIDUAL_SCALE
}

/// Interference seen by platoon `n`'s members and by the BS on every
/// subchannel, normalised, member-major then BS.
pub fn interference_features(
    transmissions: &[Transmission],
    realization: &ChannelRealization,
    platoon: &[usize],
    n: usize,
) -> Vec<f64> {
    let k = realization.num_subchannels;
    let mut out = Vec::with_capacity(platoon.len() * k);
    for &node in &platoon[1..] {
        for kk in 0..k {
            let i = compute_interference(transmissions, realization, n, ReceiverKind::Vehicle(node), kk);
            out.push(normalize_interference(i, realization.noise_w));
        }
    }
    for kk in 0..k {
        let i = compute_interference(transmissions, realization, n, ReceiverKind::BaseStation, kk);
        out.push(normalize_interference(i, realization.noise_w));
    }
    out
}

/// Assembles the observation of the platoon led by `platoon[0]`.
pub fn build_observation(
    realization: &ChannelRealization,
    platoon: &[usize],
    prev_interference: &[f64],
    residual_suts: f64,
) -> Vec<f64> {
    let k = realization.num_subchannels;
    let leader = platoon[0];
    let bs = realization.bs_node();
    let mut obs = Vec::with_capacity(observation_dim(k, platoon.len()));
    obs.extend((0..k).map(|kk| normalize_gain(realization.gain(leader, bs, kk))));
    for &member in &platoon[1..] {
        obs.extend((0..k).map(|kk| normalize_gain(realization.gain(leader, member, kk))));
    }
    debug_assert_eq!(prev_interference.len(), platoon.len() * k);
    obs.extend_from_slice(prev_interference);
    obs.push(normalize_residual(residual_suts));
    obs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_match_layout() {
        assert_eq!(observation_dim(4, 5), 4 + 16 + 16 + 4 + 1);
        assert_eq!(observation_dim(2, 1), 5);
        let r = ChannelRealization::from_gains(4, 2, 0, 1e-14, vec![1e-9; 32]);
        let obs = build_observation(&r, &[0, 1, 2], &[0.0; 6], 4000.0);
        assert_eq!(obs.len(), observation_dim(2, 3));
        assert_eq!(*obs.last().unwrap(), 0.4);
        assert!((obs[0] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn normalisation_is_finite() {
        assert!(normalize_gain(0.0).is_finite());
        assert!(normalize_gain(f64::MIN_POSITIVE).is_finite());
        assert_eq!(normalize_interference(0.0, 1e-14), 0.0);
    }
}

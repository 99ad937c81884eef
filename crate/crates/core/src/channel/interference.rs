//! Co-channel interference and SINR.

use super::ChannelRealization;
use crate::scalar::Real;

/// What one platoon leader puts on the air in a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    /// Node id of the transmitting leader.
    pub tx_node: usize,
    /// Selected subchannel (the one-hot `beta` row).
    pub subchannel: usize,
    /// `rho`: true for intra-platoon V2V, false for V2I.
    pub v2v: bool,
    pub power_text_w: f64,
    pub power_image_w: f64,
}

/// Which interference model applies at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverKind {
    /// A platoon member: only V2V transmitters interfere, radiating both
    /// streams.
    Vehicle(usize),
    /// The base station: only V2I (text) transmitters interfere.
    BaseStation,
}

/// Interference seen by `receiver` on subchannel `k` from every platoon
/// other than `own` that is active on `k`.
pub fn compute_interference(
    transmissions: &[Transmission],
    realization: &ChannelRealization,
    own: usize,
    receiver: ReceiverKind,
    k: usize,
) -> f64 {
    let mut total = 0.0;
    for (n, t) in transmissions.iter().enumerate() {
        if n == own || t.subchannel != k {
            continue;
        }
        match receiver {
            ReceiverKind::Vehicle(rx) if t.v2v => {
                total += (t.power_text_w + t.power_image_w) * realization.gain(t.tx_node, rx, k);
            }
            ReceiverKind::BaseStation if !t.v2v => {
                total += t.power_text_w * realization.gain(t.tx_node, realization.bs_node(), k);
            }
            _ => {}
        }
    }
    total
}

/// `p * h / (I + sigma^2)`.
pub fn compute_sinr<T: Real>(signal_power_w: T, gain: T, interference_w: T, sigma2_w: T) -> T {
    debug_assert!(sigma2_w > T::zero());
    signal_power_w * gain / (interference_w + sigma2_w)
}

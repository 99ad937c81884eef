use serde::{Deserialize, Serialize};

use crate::semantics::srs_hard;

/// First slot (1-based, in ms) at which the cumulative delivery reaches
/// `demand_suts`, or `window_ms` if it never does.
pub fn measure_delay(delivered_per_slot: &[f64], demand_suts: f64, slot_ms: f64, window_ms: f64) -> f64 {
    let mut cumulative = 0.0;
    for (t, d) in delivered_per_slot.iter().enumerate() {
        cumulative += d;
        if srs_hard(cumulative, demand_suts) {
            return ((t + 1) as f64 * slot_ms).min(window_ms);
        }
    }
    window_ms
}

/// Summary of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// Sum of global rewards over the episode.
    pub reward: f64,
    /// Platoon QoE averaged over platoons and slots.
    pub qoe: f64,
    /// Fraction of platoons whose payload was fully delivered in the window.
    pub srs: f64,
    /// Mean delivery delay over platoons, ms.
    pub delay_ms: f64,
    pub violations_21c: u64,
    pub violations_21h: u64,
    pub clipped_actions: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_examples() {
        assert_eq!(measure_delay(&[5000.0, 0.0], 4000.0, 1.0, 100.0), 1.0);
        assert_eq!(measure_delay(&[1.0; 100], 4000.0, 1.0, 100.0), 100.0);
        assert_eq!(measure_delay(&[40.0; 100], 4000.0, 1.0, 100.0), 100.0);
        assert_eq!(measure_delay(&[40.0; 100], 3960.0, 1.0, 100.0), 99.0);
        assert_eq!(measure_delay(&[0.0; 100], 0.0, 1.0, 100.0), 1.0);
    }
}

use num_traits::Num;

use super::{QoEProfile, SemanticsError};
use crate::scalar::Real;

/// `phi = W * H / u` in suts/s.
pub fn semantic_rate<T: Num + Copy>(bandwidth_hz: T, entropy_suts_per_word: T, u_suts_per_word: T) -> T {
    bandwidth_hz * entropy_suts_per_word / u_suts_per_word
}

/// Bit-based rate used in place of the semantic rate by the non-semantic
/// baseline: `W * H / u` with `u` in bits/word.
pub fn qoe_traditional<T: Num + Copy>(bandwidth_hz: T, entropy: T, u_bits_per_word: T) -> T {
    bandwidth_hz * entropy / u_bits_per_word
}

/// `1 / (1 + exp(slope * (target - x)))`.
pub fn score_sigmoid<T: Real>(x: T, target: T, slope: T) -> T {
    T::one() / (T::one() + (slope * (target - x)).exp())
}

/// Logistic approximation of the delivery indicator:
/// `1 / (1 + exp(-alpha * (rate - B_s / dT)))`.
///
/// Rates and `B_s / dT` must share units; `alpha` is per unit of that rate.
pub fn srs_logistic<T: Real>(delivered_rate: T, demand: T, window_s: T, alpha: T) -> T {
    T::one() / (T::one() + (-alpha * (delivered_rate - demand / window_s)).exp())
}

/// Hard delivery indicator: true iff `cumulative >= demand`.
pub fn srs_hard(cumulative_delivered: f64, demand: f64) -> bool {
    cumulative_delivered >= demand
}

/// Rate(s) a member experiences, in ksuts/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSample {
    /// Single-modal (text) member.
    Single(f64),
    /// Multi-modal member with separate text and image streams.
    Dual { text: f64, image: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberQuality {
    pub rate: RateSample,
    pub similarity: f64,
}

/// One member's QoE term and its two component scores `(term, Score_R, Score_A)`.
///
/// A multi-modal member's rate score is the mean of the text-rate score (text
/// target) and the image-rate score (image target).
pub fn qoe_member(profile: &QoEProfile, quality: &MemberQuality) -> (f64, f64, f64) {
    let score_r = match quality.rate {
        RateSample::Single(r) => score_sigmoid(r, profile.rate_target_text_ksuts, profile.gamma),
        RateSample::Dual { text, image } => {
            0.5 * (score_sigmoid(text, profile.rate_target_text_ksuts, profile.gamma)
                + score_sigmoid(image, profile.rate_target_image_ksuts, profile.gamma))
        }
    };
    let score_a = score_sigmoid(quality.similarity, profile.similarity_target, profile.delta);
    (profile.omega * score_r + (1.0 - profile.omega) * score_a, score_r, score_a)
}

/// Sum of member QoE terms.
pub fn qoe_platoon(profiles: &[QoEProfile], members: &[MemberQuality]) -> Result<f64, SemanticsError> {
    if profiles.len() != members.len() {
        return Err(SemanticsError::MemberCountMismatch { profiles: profiles.len(), members: members.len() });
    }
    Ok(profiles.iter().zip(members).map(|(p, q)| qoe_member(p, q).0).sum())
}

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AnalyticSurrogate, SemanticsError, SimilaritySurrogate};

/// Per-vehicle QoE preferences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoEProfile {
    /// Weight on the rate score; `1 - omega` weighs the accuracy score.
    pub omega: f64,
    pub rate_target_text_ksuts: f64,
    pub rate_target_image_ksuts: f64,
    pub similarity_target: f64,
    /// Rate-score slope per ksuts/s.
    pub gamma: f64,
    /// Accuracy-score slope.
    pub delta: f64,
}

/// Sampling distributions for [`QoEProfile`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileDistributions {
    pub omega: [f64; 2],
    pub similarity_target: [f64; 2],
    pub rate_target_text_ksuts: [f64; 2],
    pub rate_target_image_ksuts: [f64; 2],
    pub gamma_mean: f64,
    pub gamma_std: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
}

impl Default for ProfileDistributions {
    fn default() -> Self {
        ProfileDistributions {
            omega: [0.0, 1.0],
            similarity_target: [0.8, 0.9],
            rate_target_text_ksuts: [50.0, 70.0],
            rate_target_image_ksuts: [80.0, 100.0],
            gamma_mean: 0.1,
            gamma_std: 0.02,
            delta_mean: 55.0,
            delta_std: 2.5,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

impl ProfileDistributions {
    /// Draws one profile. Slopes are floored at 1e-6 so they stay positive.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> QoEProfile {
        let omega = uniform(rng, self.omega);
        let similarity_target = uniform(rng, self.similarity_target);
        let rate_target_text_ksuts = uniform(rng, self.rate_target_text_ksuts);
        let rate_target_image_ksuts = uniform(rng, self.rate_target_image_ksuts);
        let gamma = Normal::new(self.gamma_mean, self.gamma_std).expect("validated").sample(rng);
        let delta = Normal::new(self.delta_mean, self.delta_std).expect("validated").sample(rng);
        QoEProfile {
            omega,
            rate_target_text_ksuts,
            rate_target_image_ksuts,
            similarity_target,
            gamma: gamma.max(1e-6),
            delta: delta.max(1e-6),
        }
    }

    fn validate(&self) -> Result<(), SemanticsError> {
        let range = |name: &str, [lo, hi]: [f64; 2], lo_min: f64, hi_max: f64| {
            if lo.is_finite() && hi.is_finite() && lo <= hi && lo >= lo_min && hi <= hi_max {
                Ok(())
            } else {
                Err(SemanticsError::Invalid(format!("semantic.profiles.{name}: bad range [{lo}, {hi}]")))
            }
        };
        range("omega", self.omega, 0.0, 1.0)?;
        range("similarity_target", self.similarity_target, 0.0, 1.0)?;
        range("rate_target_text_ksuts", self.rate_target_text_ksuts, 1e-12, f64::MAX)?;
        range("rate_target_image_ksuts", self.rate_target_image_ksuts, 1e-12, f64::MAX)?;
        for (name, mean, std) in [
            ("gamma", self.gamma_mean, self.gamma_std),
            ("delta", self.delta_mean, self.delta_std),
        ] {
            if !(mean > 0.0 && std >= 0.0 && mean.is_finite() && std.is_finite()) {
                return Err(SemanticsError::Invalid(format!("semantic.profiles.{name}: mean must be positive, std non-negative")));
            }
        }
        Ok(())
    }
}

/// Analytic surrogate parameters, or a table file that replaces them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub slope_per_db: f64,
    pub midpoint_db: f64,
    pub midpoint_shift_db_per_u: f64,
    pub length_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        let a = AnalyticSurrogate::default();
        SurrogateConfig {
            slope_per_db: a.slope_per_db,
            midpoint_db: a.midpoint_db,
            midpoint_shift_db_per_u: a.midpoint_shift_db_per_u,
            length_rate: a.length_rate,
            table_path: None,
        }
    }
}

impl SurrogateConfig {
    pub fn build(&self) -> Result<SimilaritySurrogate, SemanticsError> {
        match &self.table_path {
            Some(path) => super::load_similarity_table(path),
            None => {
                let a = AnalyticSurrogate {
                    slope_per_db: self.slope_per_db,
                    midpoint_db: self.midpoint_db,
                    midpoint_shift_db_per_u: self.midpoint_shift_db_per_u,
                    length_rate: self.length_rate,
                };
                a.validate()?;
                Ok(SimilaritySurrogate::analytic(a))
            }
        }
    }
}

/// Semantic section of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticConfig {
    /// Approximate semantic entropy of single-modal text, suts/word.
    pub entropy_sm: f64,
    pub entropy_mm_text: f64,
    pub entropy_mm_image: f64,
    pub u_max_text: u32,
    pub u_max_image: u32,
    /// Fixed payload per delivery window; `None` samples it uniformly from
    /// `demand_range_suts` every episode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demand_suts: Option<f64>,
    pub demand_range_suts: [f64; 2],
    /// Upper bound on the total payload across platoons, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demand_cap_suts: Option<f64>,
    pub window_ms: u32,
    /// Logistic sharpness, per ksuts/s.
    pub logistic_alpha: f64,
    /// Weight of the delivery term in the objective.
    pub objective_lambda: f64,
    pub reward_w1: f64,
    pub reward_w2: f64,
    /// Bits per word used by the non-semantic baseline.
    pub transform_factor_bits: f64,
    /// Minimum acceptable rate/accuracy score.
    pub qoe_threshold: f64,
    pub surrogate: SurrogateConfig,
    pub profiles: ProfileDistributions,
}

impl Default for SemanticConfig {
    fn default() -> Self {
        SemanticConfig {
            entropy_sm: 4.0,
            entropy_mm_text: 4.0,
            entropy_mm_image: 6.0,
            u_max_text: 30,
            u_max_image: 30,
            demand_suts: None,
            demand_range_suts: [1000.0, 6000.0],
            demand_cap_suts: None,
            window_ms: 100,
            logistic_alpha: 1.0,
            objective_lambda: 1.0,
            reward_w1: 0.5,
            reward_w2: 0.5,
            transform_factor_bits: 40.0,
            qoe_threshold: 0.5,
            surrogate: SurrogateConfig::default(),
            profiles: ProfileDistributions::default(),
        }
    }
}

impl SemanticConfig {
    pub fn window_s(&self) -> f64 {
        f64::from(self.window_ms) * 1e-3
    }

    pub fn validate(&self) -> Result<(), SemanticsError> {
        let bad = |key: &str, msg: &str| Err(SemanticsError::Invalid(format!("semantic.{key}: {msg}")));
        for (key, v) in [
            ("entropy_sm", self.entropy_sm),
            ("entropy_mm_text", self.entropy_mm_text),
            ("entropy_mm_image", self.entropy_mm_image),
            ("logistic_alpha", self.logistic_alpha),
            ("transform_factor_bits", self.transform_factor_bits),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(key, "must be positive");
            }
        }
        for (key, v) in [
            ("objective_lambda", self.objective_lambda),
            ("reward_w1", self.reward_w1),
            ("reward_w2", self.reward_w2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(key, "must be non-negative");
            }
        }
        if self.u_max_text < 1 {
            return bad("u_max_text", "must be at least 1");
        }
        if self.u_max_image < 1 {
            return bad("u_max_image", "must be at least 1");
        }
        if self.window_ms == 0 {
            return bad("window_ms", "must be positive");
        }
        if let Some(d) = self.demand_suts {
            if !(d.is_finite() && d >= 0.0) {
                return bad("demand_suts", "must be non-negative");
            }
        }
        let [lo, hi] = self.demand_range_suts;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return bad("demand_range_suts", "must satisfy 0 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.qoe_threshold) {
            return bad("qoe_threshold", "must lie in [0, 1]");
        }
        if self.transform_factor_bits < 1.0 {
            return bad("transform_factor_bits", "must be at least 1");
        }
        self.profiles.validate()?;
        Ok(())
    }
}

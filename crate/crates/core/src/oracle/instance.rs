use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::channel::ChannelRealization;
use crate::env::{EnvSpec, PlatoonEnv, SlotParams};
use crate::semantics::{QoEProfile, SimilaritySurrogate, SurrogateKind};

/// Discrete decision grids for exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    /// Power levels as fractions of the maximum power.
    pub power_fractions: Vec<f64>,
    pub u_values: Vec<u32>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { power_fractions: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0], u_values: vec![5, 10, 20, 30] }
    }
}

/// A frozen single-slot problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticInstance {
    pub realization: ChannelRealization,
    /// Node ids per platoon, leader first.
    pub platoons: Vec<Vec<usize>>,
    /// One profile per vehicle, platoon order.
    pub profiles: Vec<Vec<QoEProfile>>,
    pub params: SlotParams,
    pub surrogate: SurrogateKind,
    pub max_power_w: f64,
    pub u_max_text: u32,
    pub u_max_image: u32,
    pub power_levels_w: Vec<f64>,
    pub u_grid: Vec<u32>,
    pub enumeration_cap: u64,
    /// Upper bound on the summed payload across platoons, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_cap_suts: Option<f64>,
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

impl StaticInstance {
    /// Freezes the environment's current slot.
    pub fn from_env(env: &PlatoonEnv, grids: &Grids) -> Result<Self, OracleError> {
        let spec: &EnvSpec = env.spec();
        let p_max = spec.scenario.max_power_w();
        let inst = StaticInstance {
            realization: env.realization()?.clone(),
            platoons: env.topology()?.platoons.clone(),
            profiles: env.profiles()?.to_vec(),
            params: spec.slot_params(env.demand_suts()?),
            surrogate: env.surrogate().kind.clone(),
            max_power_w: p_max,
            u_max_text: spec.semantic.u_max_text,
            u_max_image: spec.semantic.u_max_image,
            power_levels_w: grids.power_fractions.iter().map(|f| f * p_max).collect(),
            u_grid: grids.u_values.clone(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            demand_cap_suts: spec.semantic.demand_cap_suts,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::Instance(m.to_string()));
        if self.power_levels_w.is_empty() || self.u_grid.is_empty() {
            return bad("grids must be non-empty");
        }
        if self.power_levels_w.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("power levels must be finite and non-negative");
        }
        if self.u_grid.contains(&0) {
            return bad("symbol lengths must be at least 1");
        }
        if self.platoons.is_empty() || self.platoons.len() != self.profiles.len() {
            return bad("one profile list per platoon required");
        }
        let m = self.platoons[0].len();
        for (p, prof) in self.platoons.iter().zip(&self.profiles) {
            if p.len() != m || prof.len() != m {
                return bad("platoons must share one size and carry one profile per vehicle");
            }
            if p.iter().any(|&v| v >= self.realization.bs_node()) {
                return bad("vehicle node id out of range");
            }
        }
        if !self.realization.is_valid() {
            return bad("realization has invalid gains or noise");
        }
        Ok(())
    }

    pub fn num_agents(&self) -> usize {
        self.platoons.len()
    }

    pub fn num_subchannels(&self) -> usize {
        self.realization.num_subchannels
    }

    pub fn platoon_size(&self) -> usize {
        self.platoons[0].len()
    }

    pub fn surrogate(&self) -> SimilaritySurrogate {
        match &self.surrogate {
            SurrogateKind::Analytic(a) => SimilaritySurrogate::analytic(*a),
            SurrogateKind::Table(t) => SimilaritySurrogate::table(t.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let inst: StaticInstance = serde_json::from_str(text).map_err(|e| OracleError::Instance(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }
}

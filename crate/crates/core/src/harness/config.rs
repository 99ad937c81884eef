use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::channel::ScenarioConfig;
use crate::env::{EnvConfig, EnvSpec};
use crate::marl::{AlgorithmId, LearnerConfig};
use crate::semantics::SemanticConfig;

/// `[run]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Omits wall-clock fields so repeated runs produce identical files.
    pub deterministic: bool,
    pub output_dir: PathBuf,
    /// Save the trained learner next to the metrics.
    pub checkpoint: bool,
    /// Write a per-slot action trace.
    pub trace: bool,
    /// Evaluate this checkpoint instead of training.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_checkpoint: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            deterministic: false,
            output_dir: PathBuf::from("runs"),
            checkpoint: true,
            trace: false,
            eval_checkpoint: None,
        }
    }
}

/// `[sweep]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// `intra_platoon_gap`, `semantic_demand_size`, `transform_factor` or
    /// `custom:<section>.<key>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    pub values: Vec<f64>,
    pub algorithms: Vec<AlgorithmId>,
    pub seeds: Vec<u64>,
    /// Training episodes per point; `None` uses `learner.episodes`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes_per_point: Option<u32>,
    /// Train a fresh learner at every point. When false, each
    /// (algorithm, seed) is trained once on the base config and evaluated at
    /// every point.
    pub retrain_per_point: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            param: None,
            values: Vec::new(),
            algorithms: vec![AlgorithmId::Samramarl, AlgorithmId::Ddpg, AlgorithmId::Td3, AlgorithmId::DdpgNoSc],
            seeds: vec![1, 2, 3, 4, 5],
            episodes_per_point: None,
            retrain_per_point: true,
        }
    }
}

/// The full run configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub scenario: ScenarioConfig,
    pub semantic: SemanticConfig,
    pub env: EnvConfig,
    pub learner: LearnerConfig,
    pub sweep: SweepSection,
}

#[derive(Serialize)]
struct HashView<'a> {
    scenario: &'a ScenarioConfig,
    semantic: &'a SemanticConfig,
    env: &'a EnvConfig,
    learner: Option<&'a LearnerConfig>,
}

fn short_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

impl RunConfig {
    pub fn env_spec(&self) -> EnvSpec {
        EnvSpec { scenario: self.scenario.clone(), semantic: self.semantic.clone(), env: self.env.clone() }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.env_spec().validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.learner.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(p) = &self.sweep.param {
            super::sweep::SweepParam::parse(p)?;
        }
        if self.sweep.seeds.is_empty() {
            return Err(HarnessError::Config("sweep.seeds: must not be empty".into()));
        }
        if self.sweep.algorithms.is_empty() {
            return Err(HarnessError::Config("sweep.algorithms: must not be empty".into()));
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::Config("sweep.values: must be finite".into()));
        }
        Ok(())
    }

    /// Hash of everything that shapes results except the seed and output
    /// location, so runs differing only by seed share it.
    pub fn config_hash(&self) -> String {
        let view = HashView {
            scenario: &self.scenario,
            semantic: &self.semantic,
            env: &self.env,
            learner: Some(&self.learner),
        };
        short_hash(&toml::to_string(&view).expect("config serializes"))
    }

    /// Hash of the scenario, semantic and environment sections only.
    pub fn scenario_hash(&self) -> String {
        let view = HashView { scenario: &self.scenario, semantic: &self.semantic, env: &self.env, learner: None };
        short_hash(&toml::to_string(&view).expect("config serializes"))
    }
}

/// Parses TOML text, applying defaults for missing keys and rejecting
/// unknown ones. Errors carry the key path.
pub fn parse_config(text: &str) -> Result<RunConfig, HarnessError> {
    let de = toml::Deserializer::parse(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        HarnessError::Config(format!("{path}: {}", inner.trim()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Keys whose defaults come from the published parameter tables; every other
/// key is marked `# ledger` when emitted.
const TABLE_KEYS: &[&str] = &[
    "scenario.num_platoons",
    "scenario.platoon_size",
    "scenario.platoon_gap_m",
    "scenario.lane_width_m",
    "scenario.lanes_per_direction",
    "scenario.intersection_spacing_m",
    "scenario.map_width_m",
    "scenario.map_height_m",
    "scenario.speed_kmh",
    "scenario.carrier_ghz",
    "scenario.num_subchannels",
    "scenario.subchannel_bandwidth_hz",
    "scenario.max_power_dbm",
    "scenario.noise_dbm",
    "scenario.bs_antenna_gain_dbi",
    "scenario.vehicle_antenna_gain_dbi",
    "scenario.bs_noise_figure_db",
    "scenario.vehicle_noise_figure_db",
    "scenario.bs_height_m",
    "scenario.vehicle_height_m",
    "scenario.shadow_std_v2i_db",
    "scenario.shadow_std_v2v_db",
    "scenario.decorrelation_v2i_m",
    "scenario.decorrelation_v2v_m",
    "scenario.large_scale_period_ms",
    "scenario.slot_ms",
    "semantic.demand_range_suts",
    "semantic.qoe_threshold",
    "semantic.profiles.omega",
    "semantic.profiles.similarity_target",
    "semantic.profiles.rate_target_text_ksuts",
    "semantic.profiles.rate_target_image_ksuts",
    "semantic.profiles.gamma_mean",
    "semantic.profiles.gamma_std",
    "semantic.profiles.delta_mean",
    "semantic.profiles.delta_std",
    "learner.algorithm",
    "learner.episodes",
    "learner.actor_hidden",
    "learner.critic_hidden",
    "learner.actor_lr",
    "learner.critic_lr",
    "learner.gamma",
    "learner.tau",
    "learner.batch_size",
    "learner.buffer_capacity",
    "learner.exploration_noise",
    "learner.policy_delay",
];

/// Serializes the resolved config as TOML with a hash header and `# ledger`
/// marks on keys not taken from the parameter tables.
pub fn emit_config(cfg: &RunConfig) -> String {
    let body = toml::to_string(cfg).expect("config serializes");
    let mut out = format!("# config_hash = {}\n# scenario_hash = {}\n", cfg.config_hash(), cfg.scenario_hash());
    let mut section = String::new();
    for line in body.lines() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t.trim_matches(|c| c == '[' || c == ']').to_string();
            out.push_str(line);
        } else if let Some((key, _)) = t.split_once(" = ") {
            let full = format!("{section}.{}", key.trim());
            out.push_str(line);
            if !TABLE_KEYS.contains(&full.as_str()) {
                out.push_str(" # ledger");
            }
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    out
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{HarnessError, RunConfig};
use crate::env::{decode_action, PlatoonEnv};
use crate::marl::{self, Checkpoint};
use crate::oracle::{enumerate_optimum, evaluate_unchecked, Breakdown, Grids, Optimum, StaticInstance};

/// Oracle optimum for the first slot of one seed, optionally with the greedy
/// policy of a checkpoint scored on the same slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub config_hash: String,
    pub seed: u64,
    pub instance: StaticInstance,
    pub optimum: Optimum,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<Breakdown>,
    /// Policy objective over the optimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_ratio: Option<f64>,
}

fn rt(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

/// Freezes slot 0 of `run.seed`, enumerates it and writes
/// `oracle_<hash>_<seed>.json`. `run.eval_checkpoint` selects the policy.
pub fn oracle_report(cfg: &RunConfig) -> Result<(OracleReport, PathBuf), HarnessError> {
    cfg.validate()?;
    let spec = marl::env_spec_for(cfg.learner.algorithm, &cfg.env_spec());
    let mut env = PlatoonEnv::new(spec.clone()).map_err(rt)?;
    let obs = env.reset(cfg.run.seed).map_err(rt)?;
    let instance = StaticInstance::from_env(&env, &Grids::default()).map_err(rt)?;
    let optimum = enumerate_optimum(&instance).map_err(rt)?;
    let mut policy = None;
    if let Some(path) = &cfg.run.eval_checkpoint {
        let ckpt = Checkpoint::load(path).map_err(rt)?;
        let mut learner = marl::build_learner(&cfg.learner, marl::dims_of(&spec), cfg.run.seed).map_err(rt)?;
        learner.restore(&ckpt).map_err(rt)?;
        let raw = learner.act(&obs, false).map_err(rt)?;
        let layout = spec.action_layout();
        let actions = raw
            .iter()
            .map(|r| decode_action(r, &layout).map(|(a, _)| a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(rt)?;
        policy = Some(evaluate_unchecked(&instance, &actions).map_err(rt)?);
    }
    let policy_ratio = policy.as_ref().map(|p| p.total / optimum.value);
    let report = OracleReport { config_hash: cfg.config_hash(), seed: cfg.run.seed, instance, optimum, policy, policy_ratio };
    let dir = &cfg.run.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Runtime(format!("{}: {e}", dir.display())))?;
    let file = dir.join(format!("oracle_{}_{}.json", report.config_hash, report.seed));
    let text = serde_json::to_string_pretty(&report).map_err(rt)?;
    std::fs::write(&file, text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", file.display())))?;
    Ok((report, file))
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::env::EpisodeMetrics;
use crate::marl::EpisodeRecord;

/// One line of an episodes CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub config_hash: String,
    pub scenario_hash: String,
    pub algorithm: String,
    pub seed: u64,
    pub phase: String,
    pub episode: u32,
    pub reward: f64,
    pub qoe: f64,
    pub srs: f64,
    pub delay_ms: f64,
    pub violations_21c: u64,
    pub violations_21h: u64,
    pub clipped_actions: u64,
}

impl EpisodeRow {
    pub fn new(config_hash: &str, scenario_hash: &str, algorithm: &str, seed: u64, rec: &EpisodeRecord) -> Self {
        let m = &rec.metrics;
        EpisodeRow {
            config_hash: config_hash.into(),
            scenario_hash: scenario_hash.into(),
            algorithm: algorithm.into(),
            seed,
            phase: rec.phase.as_str().into(),
            episode: rec.episode,
            reward: m.reward,
            qoe: m.qoe,
            srs: m.srs,
            delay_ms: m.delay_ms,
            violations_21c: m.violations_21c,
            violations_21h: m.violations_21h,
            clipped_actions: m.clipped_actions,
        }
    }

    pub fn metrics(&self) -> EpisodeMetrics {
        EpisodeMetrics {
            reward: self.reward,
            qoe: self.qoe,
            srs: self.srs,
            delay_ms: self.delay_ms,
            violations_21c: self.violations_21c,
            violations_21h: self.violations_21h,
            clipped_actions: self.clipped_actions,
        }
    }
}

pub fn episodes_path(dir: &Path, config_hash: &str, seed: u64) -> PathBuf {
    dir.join(format!("run_{config_hash}_{seed}_episodes.csv"))
}

pub fn summary_path(dir: &Path, config_hash: &str, seed: u64) -> PathBuf {
    dir.join(format!("run_{config_hash}_{seed}_summary.toml"))
}

pub fn checkpoint_path(dir: &Path, config_hash: &str, seed: u64) -> PathBuf {
    dir.join(format!("run_{config_hash}_{seed}_checkpoint.json"))
}

pub fn trace_path(dir: &Path, config_hash: &str, seed: u64) -> PathBuf {
    dir.join(format!("run_{config_hash}_{seed}_trace.csv"))
}

fn io(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(format!("{}: {e}", path.display()))
}

pub fn write_rows<S: Serialize>(path: &Path, rows: &[S]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| io(path, e))).collect()
}

/// Mean and sample standard deviation (0 for fewer than two values).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, std }
    }
}

/// Per-metric statistics over a set of episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub episodes: usize,
    pub reward: Stat,
    pub qoe: Stat,
    pub srs: Stat,
    pub delay_ms: Stat,
    pub violations_21c: Stat,
    pub violations_21h: Stat,
    pub clipped_actions: Stat,
}

impl MetricStats {
    pub fn of<'a>(metrics: impl IntoIterator<Item = &'a EpisodeMetrics>) -> Self {
        let ms: Vec<&EpisodeMetrics> = metrics.into_iter().collect();
        let col = |f: &dyn Fn(&EpisodeMetrics) -> f64| Stat::of(&ms.iter().map(|m| f(m)).collect::<Vec<_>>());
        MetricStats {
            episodes: ms.len(),
            reward: col(&|m| m.reward),
            qoe: col(&|m| m.qoe),
            srs: col(&|m| m.srs),
            delay_ms: col(&|m| m.delay_ms),
            violations_21c: col(&|m| m.violations_21c as f64),
            violations_21h: col(&|m| m.violations_21h as f64),
            clipped_actions: col(&|m| m.clipped_actions as f64),
        }
    }
}

/// Structured-text summary written next to the episodes file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub scenario_hash: String,
    pub algorithm: String,
    pub seed: u64,
    pub evaluation_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub similarity_clamps: u64,
    pub train: MetricStats,
    pub eval: MetricStats,
    pub config: super::RunConfig,
}

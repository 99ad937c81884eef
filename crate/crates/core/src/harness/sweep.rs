use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::{self, MetricStats, Stat};
use super::{HarnessError, RunConfig};
use crate::env::{EpisodeMetrics, PlatoonEnv};
use crate::marl::{self, AlgorithmId, NoHooks, Phase};

/// Swept quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParam {
    IntraPlatoonGap,
    SemanticDemandSize,
    /// Bits per word for the non-semantic baseline, maximum symbol length for
    /// the others.
    TransformFactor,
    /// Dotted key path into the config, e.g. `semantic.logistic_alpha`.
    Custom(String),
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self, HarnessError> {
        match name {
            "intra_platoon_gap" => Ok(SweepParam::IntraPlatoonGap),
            "semantic_demand_size" => Ok(SweepParam::SemanticDemandSize),
            "transform_factor" => Ok(SweepParam::TransformFactor),
            _ => match name.strip_prefix("custom:") {
                Some(path) if path.contains('.') => Ok(SweepParam::Custom(path.to_string())),
                _ => Err(HarnessError::Config(format!(
                    "sweep.param: unsupported parameter {name:?} (expected intra_platoon_gap, \
                     semantic_demand_size, transform_factor or custom:<section>.<key>)"
                ))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            SweepParam::IntraPlatoonGap => "intra_platoon_gap".into(),
            SweepParam::SemanticDemandSize => "semantic_demand_size".into(),
            SweepParam::TransformFactor => "transform_factor".into(),
            SweepParam::Custom(p) => format!("custom:{p}"),
        }
    }

    /// `base` with the parameter set to `value` for `algorithm`.
    pub fn apply(&self, base: &RunConfig, algorithm: AlgorithmId, value: f64) -> Result<RunConfig, HarnessError> {
        let mut cfg = base.clone();
        cfg.learner.algorithm = algorithm;
        match self {
            SweepParam::IntraPlatoonGap => cfg.scenario.platoon_gap_m = value,
            SweepParam::SemanticDemandSize => cfg.semantic.demand_suts = Some(value),
            SweepParam::TransformFactor if algorithm == AlgorithmId::DdpgNoSc => {
                cfg.semantic.transform_factor_bits = value
            }
            SweepParam::TransformFactor => {
                if value < 1.0 || value.fract() != 0.0 || value > f64::from(u32::MAX) {
                    return Err(HarnessError::Config(format!("sweep.values: transform factor {value} is not a positive integer")));
                }
                cfg.semantic.u_max_text = value as u32;
                cfg.semantic.u_max_image = value as u32;
            }
            SweepParam::Custom(path) => cfg = set_path(&cfg, path, value)?,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set_path(cfg: &RunConfig, path: &str, value: f64) -> Result<RunConfig, HarnessError> {
    let err = |m: String| HarnessError::Config(format!("sweep.param custom:{path}: {m}"));
    let mut root = toml::Table::try_from(cfg).map_err(|e| err(e.to_string()))?;
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().expect("path has a dot");
    let mut table = &mut root;
    for k in parents {
        table = table
            .get_mut(*k)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| err(format!("no section {k:?}")))?;
    }
    let new = match table.get(*last) {
        Some(toml::Value::Integer(_)) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        Some(toml::Value::Integer(_)) => return Err(err(format!("{value} is not an integer"))),
        Some(toml::Value::Float(_)) | None => toml::Value::Float(value),
        Some(_) => return Err(err("only numeric keys can be swept".into())),
    };
    table.insert(last.to_string(), new);
    super::parse_config(&toml::to_string(&root).map_err(|e| err(e.to_string()))?)
}

/// One CSV line: a per-seed evaluation mean, or a mean/std over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `seed`, `mean` or `std`.
    pub kind: String,
    pub param: String,
    pub value: f64,
    pub algorithm: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub reward: f64,
    pub qoe: f64,
    pub srs: f64,
    pub delay_ms: f64,
    pub violations_21c: f64,
    pub violations_21h: f64,
    pub clipped_actions: f64,
}

impl SweepRow {
    fn from_stats(kind: &str, param: &str, value: f64, alg: &str, seed: Option<u64>, hash: &str, s: &MetricStats, pick: fn(Stat) -> f64) -> Self {
        SweepRow {
            kind: kind.into(),
            param: param.into(),
            value,
            algorithm: alg.into(),
            seed,
            config_hash: hash.into(),
            reward: pick(s.reward),
            qoe: pick(s.qoe),
            srs: pick(s.srs),
            delay_ms: pick(s.delay_ms),
            violations_21c: pick(s.violations_21c),
            violations_21h: pick(s.violations_21h),
            clipped_actions: pick(s.clipped_actions),
        }
    }

    fn metrics(&self) -> EpisodeMetrics {
        EpisodeMetrics {
            reward: self.reward,
            qoe: self.qoe,
            srs: self.srs,
            delay_ms: self.delay_ms,
            violations_21c: 0,
            violations_21h: 0,
            clipped_actions: 0,
        }
    }
}

/// Mean and std rows over the per-seed rows of each (value, algorithm).
/// Refuses groups whose rows come from different configurations.
pub fn aggregate_rows(seed_rows: &[SweepRow]) -> Result<Vec<SweepRow>, HarnessError> {
    let mut keys: Vec<(f64, String)> = Vec::new();
    for r in seed_rows.iter().filter(|r| r.kind == "seed") {
        if !keys.iter().any(|(v, a)| *v == r.value && *a == r.algorithm) {
            keys.push((r.value, r.algorithm.clone()));
        }
    }
    let mut out = Vec::new();
    for (value, alg) in keys {
        let group: Vec<&SweepRow> = seed_rows
            .iter()
            .filter(|r| r.kind == "seed" && r.value == value && r.algorithm == alg)
            .collect();
        let hash = &group[0].config_hash;
        if group.iter().any(|r| &r.config_hash != hash) {
            return Err(HarnessError::Runtime(format!(
                "rows for {alg} at {value} come from different configurations"
            )));
        }
        let metrics: Vec<EpisodeMetrics> = group.iter().map(|r| r.metrics()).collect();
        let mut s = MetricStats::of(&metrics);
        let col = |f: fn(&SweepRow) -> f64| Stat::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
        s.violations_21c = col(|r| r.violations_21c);
        s.violations_21h = col(|r| r.violations_21h);
        s.clipped_actions = col(|r| r.clipped_actions);
        let param = &group[0].param;
        out.push(SweepRow::from_stats("mean", param, value, &alg, None, hash, &s, |x| x.mean));
        out.push(SweepRow::from_stats("std", param, value, &alg, None, hash, &s, |x| x.std));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Per-seed rows followed by aggregate rows.
    pub rows: Vec<SweepRow>,
    pub file: PathBuf,
}

fn eval_stats(records: &[marl::EpisodeRecord]) -> MetricStats {
    MetricStats::of(records.iter().filter(|r| r.phase == Phase::Eval).map(|r| &r.metrics))
}

fn rt(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

/// Runs every (value, algorithm, seed) combination of the sweep and writes
/// `sweep_<hash>_<param>.csv` into the output directory.
pub fn sweep(cfg: &RunConfig, param: &str, values: &[f64]) -> Result<SweepOutcome, HarnessError> {
    cfg.validate()?;
    let p = SweepParam::parse(param)?;
    if values.is_empty() {
        return Err(HarnessError::Config("sweep.values: must not be empty".into()));
    }
    let sw = &cfg.sweep;
    let mut base = cfg.clone();
    if let Some(e) = sw.episodes_per_point {
        base.learner.episodes = e;
    }
    let name = p.name();

    let mut points = Vec::new();
    for &v in values {
        for &alg in &sw.algorithms {
            points.push((v, alg, p.apply(&base, alg, v)?));
        }
    }

    let seed_rows: Vec<SweepRow> = if sw.retrain_per_point {
        let jobs: Vec<(usize, u64)> =
            (0..points.len()).flat_map(|i| sw.seeds.iter().map(move |&s| (i, s))).collect();
        jobs.par_iter()
            .map(|&(i, seed)| {
                let (v, alg, pc) = &points[i];
                let out = marl::train(&pc.env_spec(), &pc.learner, seed, &mut NoHooks).map_err(rt)?;
                let s = eval_stats(&out.records);
                Ok(SweepRow::from_stats("seed", &name, *v, alg.as_str(), Some(seed), &pc.config_hash(), &s, |x| x.mean))
            })
            .collect::<Result<_, HarnessError>>()?
    } else {
        for (_, alg, pc) in &points {
            let mut trained = base.clone();
            trained.learner.algorithm = *alg;
            let same_dims = marl::dims_of(&pc.env_spec()) == marl::dims_of(&trained.env_spec());
            if pc.learner != trained.learner || !same_dims {
                return Err(HarnessError::Config(format!(
                    "sweep.retrain_per_point = false cannot sweep {name}: it changes the learner or its dimensions"
                )));
            }
        }
        let jobs: Vec<(AlgorithmId, u64)> =
            sw.algorithms.iter().flat_map(|&a| sw.seeds.iter().map(move |&s| (a, s))).collect();
        let per_job: Vec<Vec<(usize, SweepRow)>> = jobs
            .par_iter()
            .map(|&(alg, seed)| {
                let mut trained = base.clone();
                trained.learner.algorithm = alg;
                let mut out = marl::train(&trained.env_spec(), &trained.learner, seed, &mut NoHooks).map_err(rt)?;
                let mut rows = Vec::new();
                for (i, (v, a, pc)) in points.iter().enumerate() {
                    if *a != alg {
                        continue;
                    }
                    let spec = marl::env_spec_for(alg, &pc.env_spec());
                    let mut env = PlatoonEnv::new(spec).map_err(rt)?;
                    let recs = marl::evaluate(&mut env, out.learner.as_mut(), seed, pc.learner.eval_episodes, &mut NoHooks)
                        .map_err(rt)?;
                    let s = eval_stats(&recs);
                    rows.push((i, SweepRow::from_stats("seed", &name, *v, alg.as_str(), Some(seed), &pc.config_hash(), &s, |x| x.mean)));
                }
                Ok(rows)
            })
            .collect::<Result<_, HarnessError>>()?;
        let mut flat: Vec<(usize, SweepRow)> = per_job.into_iter().flatten().collect();
        flat.sort_by_key(|(i, r)| (*i, sw.seeds.iter().position(|s| Some(*s) == r.seed)));
        flat.into_iter().map(|(_, r)| r).collect()
    };

    let mut rows = seed_rows.clone();
    rows.extend(aggregate_rows(&seed_rows)?);
    let dir = &cfg.run.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Runtime(format!("{}: {e}", dir.display())))?;
    let safe: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' }).collect();
    let file = dir.join(format!("sweep_{}_{safe}.csv", cfg.config_hash()));
    output::write_rows(&file, &rows)?;
    Ok(SweepOutcome { rows, file })
}

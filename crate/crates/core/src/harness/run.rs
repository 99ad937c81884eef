use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use super::output::{self, EpisodeRow, MetricStats, RunSummary};
use super::{HarnessError, RunConfig};
use crate::env::{PlatoonEnv, StepResult};
use crate::marl::{self, Checkpoint, EpisodeRecord, Learner, Phase, TrainHooks};

/// Files and records produced by one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<EpisodeRecord>,
    pub rows: Vec<EpisodeRow>,
    pub summary: RunSummary,
    pub episodes_file: PathBuf,
    pub summary_file: PathBuf,
    pub checkpoint_file: Option<PathBuf>,
    pub trace_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
struct TraceRow {
    phase: &'static str,
    episode: u32,
    slot: u64,
    agent: usize,
    subchannel: usize,
    v2v: bool,
    power_text_w: f64,
    power_image_w: f64,
    u_text: String,
    u_image: String,
    qoe: f64,
    logistic: f64,
    local_reward: f64,
}

#[derive(Default)]
struct Tracer {
    enabled: bool,
    rows: Vec<TraceRow>,
}

impl TrainHooks for Tracer {
    fn on_step(&mut self, phase: Phase, episode: u32, step: &StepResult) {
        if !self.enabled {
            return;
        }
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        for (n, (a, p)) in step.info.actions.iter().zip(&step.info.outcome.platoons).enumerate() {
            self.rows.push(TraceRow {
                phase: phase.as_str(),
                episode,
                slot: step.info.slot,
                agent: n,
                subchannel: a.subchannel,
                v2v: a.v2v,
                power_text_w: a.power_text_w,
                power_image_w: a.power_image_w,
                u_text: join(&a.u_text),
                u_image: join(&a.u_image),
                qoe: p.qoe,
                logistic: p.logistic,
                local_reward: p.local_reward,
            });
        }
    }
}

fn runtime(context: &str) -> impl Fn(marl::MarlError) -> HarnessError + '_ {
    move |e| HarnessError::Runtime(format!("{context}: {e}"))
}

/// Trains (or, with `run.eval_checkpoint`, only evaluates) one algorithm on
/// one seed and writes the metrics files into `run.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = &cfg.run.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Runtime(format!("{}: {e}", dir.display())))?;
    let hash = cfg.config_hash();
    let scenario_hash = cfg.scenario_hash();
    let seed = cfg.run.seed;
    let alg = cfg.learner.algorithm;
    let mut tracer = Tracer { enabled: cfg.run.trace, rows: Vec::new() };

    let spec = marl::env_spec_for(alg, &cfg.env_spec());
    let (records, learner, clamps): (Vec<EpisodeRecord>, Box<dyn Learner>, u64) = match &cfg.run.eval_checkpoint {
        Some(path) => {
            let ckpt = Checkpoint::load(path).map_err(runtime("loading checkpoint"))?;
            let mut learner = marl::build_learner(&cfg.learner, marl::dims_of(&spec), seed).map_err(runtime("building learner"))?;
            learner.restore(&ckpt).map_err(runtime("restoring checkpoint"))?;
            let mut env = PlatoonEnv::new(spec).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            let recs = marl::evaluate(&mut env, learner.as_mut(), seed, cfg.learner.eval_episodes, &mut tracer)
                .map_err(runtime("evaluation"))?;
            (recs, learner, env.surrogate().clamp_count())
        }
        None => {
            let out = marl::train(&cfg.env_spec(), &cfg.learner, seed, &mut tracer).map_err(runtime("training"))?;
            (out.records, out.learner, out.similarity_clamps)
        }
    };

    let rows: Vec<EpisodeRow> = records.iter().map(|r| EpisodeRow::new(&hash, &scenario_hash, alg.as_str(), seed, r)).collect();
    let episodes_file = output::episodes_path(dir, &hash, seed);
    output::write_rows(&episodes_file, &rows)?;

    let mut checkpoint_file = None;
    if cfg.run.checkpoint && cfg.run.eval_checkpoint.is_none() {
        let mut ckpt = learner.checkpoint();
        ckpt.config_hash = Some(hash.clone());
        let path = output::checkpoint_path(dir, &hash, seed);
        ckpt.save(&path).map_err(runtime("saving checkpoint"))?;
        checkpoint_file = Some(path);
    }
    let mut trace_file = None;
    if cfg.run.trace {
        let path = output::trace_path(dir, &hash, seed);
        output::write_rows(&path, &tracer.rows)?;
        trace_file = Some(path);
    }

    let phase = |p: Phase| records.iter().filter(move |r| r.phase == p).map(|r| &r.metrics);
    let summary = RunSummary {
        config_hash: hash.clone(),
        scenario_hash,
        algorithm: alg.as_str().into(),
        seed,
        evaluation_only: cfg.run.eval_checkpoint.is_some(),
        wall_time_s: (!cfg.run.deterministic).then(|| start.elapsed().as_secs_f64()),
        similarity_clamps: clamps,
        train: MetricStats::of(phase(Phase::Train)),
        eval: MetricStats::of(phase(Phase::Eval)),
        config: cfg.clone(),
    };
    let summary_file = output::summary_path(dir, &hash, seed);
    let text = format!(
        "# resolved config follows under [config]\n{}",
        toml::to_string(&summary).map_err(|e| HarnessError::Runtime(e.to_string()))?
    );
    std::fs::write(&summary_file, text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", summary_file.display())))?;

    Ok(RunOutcome { records, rows, summary, episodes_file, summary_file, checkpoint_file, trace_file })
}

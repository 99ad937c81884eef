mod common;

use platoon_core::harness::*;
use platoon_core::marl::AlgorithmId;

fn tiny(dir: &std::path::Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.scenario.num_platoons = 2;
    cfg.scenario.platoon_size = 2;
    cfg.scenario.num_subchannels = 2;
    cfg.env.slots_per_episode = Some(10);
    cfg.learner.episodes = 3;
    cfg.learner.eval_episodes = 2;
    cfg.learner.actor_hidden = vec![8];
    cfg.learner.critic_hidden = vec![8];
    cfg.learner.batch_size = 8;
    cfg.run.output_dir = dir.to_path_buf();
    cfg.run.deterministic = true;
    cfg
}

#[test]
fn empty_file_gives_table_defaults() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.scenario.num_platoons * cfg.scenario.platoon_size, 20);
    assert_eq!(cfg.scenario.num_subchannels, 4);
    assert_eq!(cfg.learner.actor_hidden, vec![1024, 512]);
    assert_eq!(cfg.learner.critic_hidden, vec![1024, 512, 256]);
    assert_eq!((cfg.learner.critic_lr, cfg.learner.actor_lr), (1e-3, 1e-4));
    assert_eq!((cfg.learner.gamma, cfg.learner.tau), (0.99, 0.005));
    assert_eq!(cfg.learner.episodes, 500);
    assert_eq!(cfg.learner.buffer_capacity, 1_000_000);
}

#[test]
fn gap_out_of_range_is_reported_with_key() {
    let err = parse_config("[scenario]\nplatoon_gap_m = 50\n").unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("scenario.platoon_gap_m"), "{err}");
}

#[test]
fn unknown_keys_and_type_errors_carry_paths() {
    let err = parse_config("[learner]\nbatch = 3\n").unwrap_err();
    assert!(err.to_string().contains("learner"), "{err}");
    let err = parse_config("[semantic.profiles]\ngamma_mean = \"x\"\n").unwrap_err();
    assert!(err.to_string().contains("semantic.profiles.gamma_mean"), "{err}");
    let err = parse_config("[learner]\nalgorithm = \"ppo\"\n").unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn emit_parse_round_trip_and_ledger_marks() {
    let mut cfg = RunConfig::default();
    cfg.semantic.demand_suts = Some(4000.0);
    cfg.sweep.param = Some("custom:semantic.logistic_alpha".into());
    cfg.sweep.values = vec![0.5, 1.0 / 3.0];
    let text = emit_config(&cfg);
    assert_eq!(parse_config(&text).unwrap(), cfg);
    assert!(text.contains(&cfg.config_hash()));
    let line = |k: &str| text.lines().find(|l| l.starts_with(&format!("{k} ="))).unwrap().to_string();
    assert!(line("logistic_alpha").ends_with("# ledger"));
    assert!(!line("platoon_gap_m").contains("ledger"));
    assert!(!line("tau").contains("ledger"));
}

#[test]
fn hashes_ignore_seed_and_track_learner() {
    let a = RunConfig::default();
    let mut b = a.clone();
    b.run.seed = 9;
    assert_eq!(a.config_hash(), b.config_hash());
    b.learner.algorithm = AlgorithmId::Td3;
    assert_ne!(a.config_hash(), b.config_hash());
    assert_eq!(a.scenario_hash(), b.scenario_hash());
    b.scenario.platoon_gap_m = 10.0;
    assert_ne!(a.scenario_hash(), b.scenario_hash());
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let read = |o: &RunOutcome| {
        [&o.episodes_file, &o.summary_file, o.checkpoint_file.as_ref().unwrap()]
            .map(|f| std::fs::read_to_string(f).unwrap())
    };
    let a = read(&run(&tiny(d.path())).unwrap());
    let b = read(&run(&tiny(d.path())).unwrap());
    assert!(a == b, "metrics files differ between identical runs");
    assert!(!a[1].contains("wall_time"));
}

#[test]
fn files_stay_inside_output_dir_and_embed_hash() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = tiny(d.path());
    cfg.run.trace = true;
    let out = run(&cfg).unwrap();
    let hash = cfg.config_hash();
    for f in [&out.episodes_file, &out.summary_file, out.checkpoint_file.as_ref().unwrap(), out.trace_file.as_ref().unwrap()] {
        assert!(f.starts_with(d.path()));
        assert!(f.file_name().unwrap().to_str().unwrap().contains(&hash));
    }
    let rows = read_episodes(&out.episodes_file).unwrap();
    assert_eq!(rows, out.rows);
    assert!(rows.iter().all(|r| r.config_hash == hash));
    assert_eq!(rows.len(), 5);
    let trace = std::fs::read_to_string(out.trace_file.unwrap()).unwrap();
    assert_eq!(trace.lines().count(), 1 + 5 * 10 * 2);
}

#[test]
fn evaluation_only_leaves_checkpoint_untouched() {
    let d = tempfile::tempdir().unwrap();
    let first = run(&tiny(d.path())).unwrap();
    let ckpt = first.checkpoint_file.unwrap();
    let before = std::fs::read(&ckpt).unwrap();
    let mut cfg = tiny(d.path());
    cfg.run.eval_checkpoint = Some(ckpt.clone());
    let second = run(&cfg).unwrap();
    assert!(second.checkpoint_file.is_none());
    assert!(second.summary.evaluation_only);
    assert_eq!(std::fs::read(&ckpt).unwrap(), before);
    let eval = |rows: &[EpisodeRow]| rows.iter().filter(|r| r.phase == "eval").cloned().collect::<Vec<_>>();
    assert_eq!(eval(&second.rows), eval(&first.rows));
}

#[test]
fn random_policy_calibration_is_non_degenerate() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = tiny(d.path());
    cfg.learner.algorithm = AlgorithmId::Random;
    cfg.learner.episodes = 100;
    cfg.env.slots_per_episode = None;
    cfg.run.checkpoint = false;
    let out = run(&cfg).unwrap();
    let srs = out.summary.train.srs.mean;
    assert!(srs > 0.0 && srs < 1.0, "{srs}");
    assert!(out.rows.iter().all(|r| (0.0..=1.0).contains(&r.srs) && r.delay_ms > 0.0 && r.delay_ms <= 100.0));
}

#[test]
fn single_value_sweep_matches_run() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = tiny(d.path());
    cfg.sweep.algorithms = vec![AlgorithmId::Samramarl];
    cfg.sweep.seeds = vec![4];
    let sw = sweep(&cfg, "intra_platoon_gap", &[20.0]).unwrap();
    cfg.run.seed = 4;
    let r = run(&cfg).unwrap();
    let row = &sw.rows[0];
    assert_eq!(row.kind, "seed");
    assert_eq!(row.qoe, r.summary.eval.qoe.mean);
    assert_eq!(row.reward, r.summary.eval.reward.mean);
    assert_eq!(row.delay_ms, r.summary.eval.delay_ms.mean);
    assert_eq!(sw.rows[1].qoe, row.qoe);
    assert_eq!(sw.rows[2].qoe, 0.0);
}

#[test]
fn sweep_aggregates_recompute_from_rows() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = tiny(d.path());
    cfg.learner.episodes = 1;
    cfg.sweep.algorithms = vec![AlgorithmId::Random, AlgorithmId::DdpgNoSc];
    cfg.sweep.seeds = vec![1, 2, 3];
    let sw = sweep(&cfg, "transform_factor", &[10.0, 20.0]).unwrap();
    let seeds: Vec<_> = sw.rows.iter().filter(|r| r.kind == "seed").cloned().collect();
    assert_eq!(seeds.len(), 2 * 2 * 3);
    let aggs: Vec<_> = sw.rows.iter().filter(|r| r.kind != "seed").collect();
    assert_eq!(aggs.len(), 2 * 2 * 2);
    for a in aggs.iter().filter(|r| r.kind == "mean") {
        let g: Vec<f64> = seeds.iter().filter(|r| r.value == a.value && r.algorithm == a.algorithm).map(|r| r.qoe).collect();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        assert!((m - a.qoe).abs() <= 1e-12);
    }
    let text = std::fs::read_to_string(&sw.file).unwrap();
    assert!(text.starts_with("kind,param,value,algorithm,seed,config_hash,"));

    let mut mixed = seeds.clone();
    mixed[1].config_hash = "other".into();
    assert!(aggregate_rows(&mixed).is_err());
}

#[test]
fn train_once_sweep_rejects_learner_changes() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = tiny(d.path());
    cfg.sweep.retrain_per_point = false;
    cfg.sweep.algorithms = vec![AlgorithmId::Random];
    cfg.sweep.seeds = vec![1];
    assert!(sweep(&cfg, "custom:learner.tau", &[0.1]).is_err());
    let sw = sweep(&cfg, "semantic_demand_size", &[1000.0, 6000.0]).unwrap();
    assert_eq!(sw.rows.iter().filter(|r| r.kind == "seed").count(), 2);
}

#[test]
fn unsupported_sweep_parameter() {
    let err = SweepParam::parse("noise").unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert_eq!(SweepParam::parse("custom:scenario.noise_dbm").unwrap(), SweepParam::Custom("scenario.noise_dbm".into()));
    let cfg = RunConfig::default();
    let c = SweepParam::parse("custom:scenario.noise_dbm").unwrap().apply(&cfg, AlgorithmId::Samramarl, -110.0).unwrap();
    assert_eq!(c.scenario.noise_dbm, -110.0);
    let c = SweepParam::TransformFactor.apply(&cfg, AlgorithmId::DdpgNoSc, 80.0).unwrap();
    assert_eq!(c.semantic.transform_factor_bits, 80.0);
    assert!(SweepParam::TransformFactor.apply(&cfg, AlgorithmId::Ddpg, 2.5).is_err());
}

#[test]
fn compare_self_is_zero_and_scenarios_must_match() {
    let d = tempfile::tempdir().unwrap();
    let rows = run(&tiny(d.path())).unwrap().rows;
    let sets = [RunSet { label: "a".into(), rows: rows.clone() }, RunSet { label: "b".into(), rows: rows.clone() }];
    let diffs = compare_algorithms(&sets).unwrap();
    assert!(diffs.iter().all(|x| x.mean_diff == 0.0 && x.zero == x.seeds));
    assert_eq!(render_report(&diffs), render_report(&compare_algorithms(&sets).unwrap()));

    let mut other = rows.clone();
    for r in &mut other {
        r.scenario_hash = "elsewhere".into();
    }
    let bad = [RunSet { label: "a".into(), rows }, RunSet { label: "c".into(), rows: other }];
    assert!(compare_algorithms(&bad).is_err());
}

#[test]
fn shipped_config_parses() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/small.toml");
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.scenario.num_platoons, 2);
    assert_eq!(cfg.learner.actor_hidden, vec![32, 32]);
    assert!(!cfg.sweep.retrain_per_point);
}

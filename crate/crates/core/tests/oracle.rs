mod common;

use common::{env_at, small_spec, spec_with};
use platoon_core::channel::ChannelRealization;
use platoon_core::env::AgentAction;
use platoon_core::oracle::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> (platoon_core::env::PlatoonEnv, StaticInstance) {
    let env = env_at(&small_spec(), seed);
    let inst = StaticInstance::from_env(&env, &Grids::default()).unwrap();
    (env, inst)
}

fn random_grid_assignment(inst: &StaticInstance, rng: &mut ChaCha8Rng) -> Vec<AgentAction> {
    let cands = agent_candidates(inst);
    (0..inst.num_agents()).map(|_| cands[rng.random_range(0..cands.len())].clone()).collect()
}

#[test]
fn objective_matches_environment_slot_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..10 {
        let (env, inst) = instance(seed);
        for _ in 0..50 {
            let a = random_grid_assignment(&inst, &mut rng);
            let ours = evaluate_objective(&inst, &a).unwrap();
            let theirs = env.evaluate(&a).unwrap();
            assert!((ours.total - theirs.objective).abs() <= 1e-9, "{} vs {}", ours.total, theirs.objective);
            assert_eq!(ours.violations.collisions, theirs.collisions);
            assert_eq!(ours.violations.score, theirs.score_violations);
        }
    }
}

#[test]
fn candidate_count_for_small_grid() {
    let (_, inst) = instance(1);
    // V2V: 2 subchannels x 10 feasible power pairs x 4 text lengths;
    // V2I: 2 subchannels x 4 text powers x 4 text lengths.
    assert_eq!(agent_candidates(&inst).len(), 80 + 32);
}

#[test]
fn optimum_dominates_sampled_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (_, inst) = instance(4);
    let opt = enumerate_optimum(&inst).unwrap();
    assert_eq!(opt.evaluated, 112 * 112);
    let check = evaluate_objective(&inst, &opt.assignment).unwrap();
    assert_eq!(check.total, opt.value);
    for _ in 0..500 {
        let a = random_grid_assignment(&inst, &mut rng);
        assert!(evaluate_objective(&inst, &a).unwrap().total <= opt.value);
    }
    assert_eq!(enumerate_optimum(&inst).unwrap(), opt);
}

fn symmetric_instance() -> StaticInstance {
    let (_, mut inst) = instance(0);
    // Nodes 0,1 form platoon 0, nodes 2,3 platoon 1, node 4 is the BS.
    let n = 5;
    let mut g = vec![1e-12; n * n * 2];
    let mut set = |a: usize, b: usize, v: f64| {
        for k in 0..2 {
            g[(a * n + b) * 2 + k] = v;
            g[(b * n + a) * 2 + k] = v;
        }
    };
    set(0, 1, 1e-8);
    set(2, 3, 1e-8);
    set(0, 3, 1e-8);
    set(2, 1, 1e-8);
    set(0, 4, 1e-13);
    set(2, 4, 1e-13);
    inst.realization = ChannelRealization::from_gains(n, 2, 0, inst.realization.noise_w, g);
    inst.platoons = vec![vec![0, 1], vec![2, 3]];
    let p = inst.profiles[0][1];
    inst.profiles = vec![vec![p; 2]; 2];
    inst
}

#[test]
fn symmetric_pair_splits_subchannels() {
    let opt = enumerate_optimum(&symmetric_instance()).unwrap();
    assert_ne!(opt.assignment[0].subchannel, opt.assignment[1].subchannel);
    assert_eq!(opt.breakdown.violations.collisions, 0);
}

#[test]
fn optimum_invariant_under_relabelling() {
    let (_, inst) = instance(6);
    let base = enumerate_optimum(&inst).unwrap().value;

    let mut swapped = inst.clone();
    swapped.platoons.reverse();
    swapped.profiles.reverse();
    let v = enumerate_optimum(&swapped).unwrap().value;
    assert!((v - base).abs() <= 1e-12 * base.abs().max(1.0));

    let r = &inst.realization;
    let n = r.num_nodes;
    let mut g = vec![0.0; r.gains().len()];
    for a in 0..n {
        for b in 0..n {
            for k in 0..2 {
                g[(a * n + b) * 2 + (1 - k)] = r.gain(a, b, k);
            }
        }
    }
    let mut flipped = inst.clone();
    flipped.realization = ChannelRealization::from_gains(n, 2, r.slot, r.noise_w, g);
    let v = enumerate_optimum(&flipped).unwrap().value;
    assert!((v - base).abs() <= 1e-12 * base.abs().max(1.0));
}

#[test]
fn off_grid_and_oversized_are_errors() {
    let (_, inst) = instance(2);
    let mut a = agent_candidates(&inst)[..2].to_vec();
    a[1].power_text_w = 0.123;
    assert!(matches!(evaluate_objective(&inst, &a), Err(OracleError::OffGrid { agent: 1, .. })));
    assert!(evaluate_unchecked(&inst, &a).is_ok());
    a.pop();
    assert!(matches!(evaluate_objective(&inst, &a), Err(OracleError::Shape(_))));

    let mut big = inst.clone();
    big.enumeration_cap = 1000;
    assert!(matches!(enumerate_optimum(&big), Err(OracleError::TooLarge { .. })));
}

#[test]
fn instance_round_trips_through_json() {
    let (_, inst) = instance(8);
    let back = StaticInstance::from_json(&inst.to_json()).unwrap();
    assert_eq!(back, inst);
}

#[test]
fn larger_platoons_match_environment() {
    let env = env_at(&spec_with(3, 4, 3), 5);
    let grids = Grids { power_fractions: vec![0.0, 0.5, 1.0], u_values: vec![4, 16] };
    let inst = StaticInstance::from_env(&env, &grids).unwrap();
    let cands = agent_candidates(&inst);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let a: Vec<_> = (0..3).map(|_| cands[rng.random_range(0..cands.len())].clone()).collect();
        let ours = evaluate_objective(&inst, &a).unwrap().total;
        let theirs = env.evaluate(&a).unwrap().objective;
        assert!((ours - theirs).abs() <= 1e-9);
    }
}

#[test]
fn binary_weights_have_zero_gap() {
    let (_, inst) = instance(3);
    let opt = enumerate_optimum(&inst).unwrap();
    let beta: Vec<Vec<f64>> = opt
        .assignment
        .iter()
        .map(|a| (0..2).map(|k| if k == a.subchannel { 1.0 } else { 0.0 }).collect())
        .collect();
    for rule in [ThresholdRule::Argmax, ThresholdRule::Half] {
        let r = relaxation_gap(&inst, &beta, &opt.assignment, rule).unwrap();
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.thresholded, opt.value);
    }
}

#[test]
fn threshold_rules() {
    assert_eq!(threshold(&[0.3, 0.3, 0.4], ThresholdRule::Argmax), 2);
    assert_eq!(threshold(&[0.5, 0.5], ThresholdRule::Argmax), 0);
    assert_eq!(threshold(&[0.2, 0.3], ThresholdRule::Half), 1);
    assert_eq!(threshold(&[0.45, 0.55], ThresholdRule::Half), 1);
}

#[test]
fn bad_weights_are_rejected() {
    let (_, inst) = instance(3);
    let a = agent_candidates(&inst)[..2].to_vec();
    assert!(relaxation_gap(&inst, &[vec![0.7, 0.7], vec![1.0, 0.0]], &a, ThresholdRule::Argmax).is_err());
    assert!(relaxation_gap(&inst, &[vec![1.0], vec![1.0, 0.0]], &a, ThresholdRule::Argmax).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relaxed_objective_is_finite(seed in 0u64..50, w0 in 0.0f64..=1.0, w1 in 0.0f64..=1.0) {
        let (_, inst) = instance(seed);
        let a = agent_candidates(&inst)[..2].to_vec();
        let beta = vec![vec![w0, 1.0 - w0], vec![1.0 - w1, w1]];
        let r = relaxation_gap(&inst, &beta, &a, ThresholdRule::Argmax).unwrap();
        prop_assert!(r.relaxed.is_finite() && r.thresholded.is_finite());
    }
}

#![allow(dead_code)]

use platoon_core::channel::ScenarioConfig;
use platoon_core::env::{EnvSpec, PlatoonEnv};

/// Two platoons of two vehicles on two subchannels.
pub fn small_spec() -> EnvSpec {
    let mut spec = EnvSpec::default();
    spec.scenario = ScenarioConfig { num_platoons: 2, platoon_size: 2, num_subchannels: 2, ..Default::default() };
    spec
}

pub fn spec_with(n: usize, m: usize, k: usize) -> EnvSpec {
    let mut spec = EnvSpec::default();
    spec.scenario = ScenarioConfig { num_platoons: n, platoon_size: m, num_subchannels: k, ..Default::default() };
    spec
}

pub fn env_at(spec: &EnvSpec, seed: u64) -> PlatoonEnv {
    let mut env = PlatoonEnv::new(spec.clone()).unwrap();
    env.reset(seed).unwrap();
    env
}

pub mod gradcheck {
    use platoon_core::marl::grad::{actor_objective_and_grad, critic_loss_and_grad, input_gradient, CriticTerm};
    use platoon_core::marl::{Activation, Mlp};
    use rand::Rng;

    const H: f64 = 1e-6;

    /// `||a - b|| / max(||a||, ||b||, 1e-8)`.
    pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&diff) / norm(a).max(norm(b)).max(1e-8)
    }

    /// Central differences of `f` around `x`.
    pub fn central_diff(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut p = x.to_vec();
        (0..x.len())
            .map(|i| {
                p[i] = x[i] + H;
                let up = f(&p);
                p[i] = x[i] - H;
                let down = f(&p);
                p[i] = x[i];
                (up - down) / (2.0 * H)
            })
            .collect()
    }

    fn vec_in<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn net<R: Rng>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Mlp<f64> {
        Mlp::init(sizes, hidden, output, 1.0, rng)
    }

    fn rebuilt(like: &Mlp<f64>, params: &[f64]) -> Mlp<f64> {
        let (h, o) = like.activations();
        Mlp::from_params(like.sizes(), h, o, params.to_vec()).unwrap()
    }

    /// Worst relative errors `[critic params, d Q / d input, actor params]`
    /// for one random set of small networks.
    pub fn trial<R: Rng>(hidden: Activation, rng: &mut R) -> [f64; 3] {
        let obs = rng.random_range(1..7);
        let act = rng.random_range(1..4);
        let width = rng.random_range(2..17);
        let depth = rng.random_range(1..3);
        let mut critic_sizes = vec![obs + act];
        critic_sizes.extend(std::iter::repeat_n(width, depth));
        critic_sizes.push(1);
        let critic = net(&critic_sizes, hidden, Activation::Identity, rng);
        let batch = rng.random_range(1..20);
        let inputs: Vec<Vec<f64>> = (0..batch).map(|_| vec_in(obs + act, rng)).collect();
        let targets = vec_in(batch, rng);

        let (_, g) = critic_loss_and_grad(&critic, &inputs, &targets, false).unwrap();
        let fd = central_diff(critic.params(), |p| {
            critic_loss_and_grad(&rebuilt(&critic, p), &inputs, &targets, false).unwrap().0
        });
        let e_critic = rel_err(&g, &fd);

        let x = &inputs[0];
        let ga = input_gradient(&critic, x).unwrap();
        let fd = central_diff(x, |x| critic.forward(x).unwrap()[0]);
        let e_input = rel_err(&ga, &fd);

        let other = net(&critic_sizes, hidden, Activation::Identity, rng);
        let actor = net(&[obs, width, act], hidden, Activation::Tanh, rng);
        let observations: Vec<Vec<f64>> = inputs.iter().map(|v| v[..obs].to_vec()).collect();
        let w = rng.random_range(0.0..2.0);
        let terms = [
            CriticTerm { critic: &critic, inputs: &inputs, action_offset: obs, weight: 1.0 },
            CriticTerm { critic: &other, inputs: &inputs, action_offset: obs, weight: w },
        ];
        let (_, g) = actor_objective_and_grad(&actor, &observations, &terms, false).unwrap();
        let fd = central_diff(actor.params(), |p| {
            actor_objective_and_grad(&rebuilt(&actor, p), &observations, &terms, false).unwrap().0
        });
        let e_actor = rel_err(&g, &fd);
        [e_critic, e_input, e_actor]
    }
}

pub mod stats {
    use platoon_core::channel::{sample_fast_fading, update_shadowing, ShadowingParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    pub fn std(x: &[f64]) -> f64 {
        let m = mean(x);
        (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
    }

    pub fn median(x: &[f64]) -> f64 {
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    /// `n` Rayleigh power draws.
    pub fn fading_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| sample_fast_fading(&mut rng)).collect()
    }

    /// `n` successive shadowing values along a path with `moved_m` steps,
    /// started from a stationary draw.
    pub fn shadowing_path(params: ShadowingParams, moved_m: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = params.sample(&mut rng);
        (0..n)
            .map(|_| {
                s = update_shadowing(s, moved_m, params, &mut rng);
                s
            })
            .collect()
    }
}

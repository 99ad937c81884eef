//! Batch losses and their parameter gradients.
//!
//! Per-sample gradients are accumulated in fixed-size chunks and the chunk
//! sums are added in chunk order, so the result is bit-identical whether the
//! chunks run sequentially or on the rayon pool.

use rayon::prelude::*;

use super::{MarlError, Mlp};
use crate::scalar::Real;

/// Samples per gradient chunk.
pub const GRAD_CHUNK: usize = 16;

/// Sums `f(i, grad)` over `0..n` into a fresh gradient of length `n_params`.
/// `f` adds sample `i`'s gradient into `grad` and returns its loss term.
pub fn reduce_batch<T, F>(n: usize, n_params: usize, parallel: bool, f: F) -> Result<(T, Vec<T>), MarlError>
where
    T: Real,
    F: Fn(usize, &mut [T]) -> Result<T, MarlError> + Sync,
{
    let chunk = |c: usize| -> Result<(T, Vec<T>), MarlError> {
        let mut g = vec![T::zero(); n_params];
        let mut loss = T::zero();
        for i in c * GRAD_CHUNK..((c + 1) * GRAD_CHUNK).min(n) {
            loss = loss + f(i, &mut g)?;
        }
        Ok((loss, g))
    };
    let chunks = n.div_ceil(GRAD_CHUNK);
    let parts: Vec<Result<(T, Vec<T>), MarlError>> = if parallel {
        (0..chunks).into_par_iter().map(chunk).collect()
    } else {
        (0..chunks).map(chunk).collect()
    };
    let mut total = T::zero();
    let mut grad = vec![T::zero(); n_params];
    for part in parts {
        let (l, g) = part?;
        total = total + l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a = *a + *b;
        }
    }
    Ok((total, grad))
}

/// Mean squared error `mean_b (Q(x_b) - y_b)^2` and its gradient with respect
/// to the critic's parameters.
pub fn critic_loss_and_grad<T: Real>(
    critic: &Mlp<T>,
    inputs: &[Vec<T>],
    targets: &[T],
    parallel: bool,
) -> Result<(T, Vec<T>), MarlError> {
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(MarlError::Shape { what: "critic batch", expected: inputs.len(), got: targets.len() });
    }
    let b = T::of(inputs.len() as f64);
    let (loss, mut grad) = reduce_batch(inputs.len(), critic.num_params(), parallel, |i, g| {
        let tape = critic.forward_tape(&inputs[i])?;
        let err = tape.output()[0] - targets[i];
        critic.backward(&tape, &[T::of(2.0) * err], Some(g))?;
        Ok(err * err)
    })?;
    grad.iter_mut().for_each(|g| *g = *g / b);
    Ok((loss / b, grad))
}

/// A frozen critic evaluated with one action slice driven by the actor.
#[derive(Debug, Clone, Copy)]
pub struct CriticTerm<'a, T> {
    pub critic: &'a Mlp<T>,
    /// Per-sample critic inputs; the slice at `action_offset` is overwritten
    /// with the actor output.
    pub inputs: &'a [Vec<T>],
    pub action_offset: usize,
    pub weight: T,
}

/// `J = mean_b sum_c w_c Q_c(x_{c,b} with a = pi(obs_b))` and `dJ / d theta`.
pub fn actor_objective_and_grad<T: Real>(
    actor: &Mlp<T>,
    obs: &[Vec<T>],
    terms: &[CriticTerm<'_, T>],
    parallel: bool,
) -> Result<(T, Vec<T>), MarlError> {
    for t in terms {
        if t.inputs.len() != obs.len() {
            return Err(MarlError::Shape { what: "actor batch", expected: obs.len(), got: t.inputs.len() });
        }
    }
    let d = actor.output_dim();
    let b = T::of(obs.len().max(1) as f64);
    let (j, mut grad) = reduce_batch(obs.len(), actor.num_params(), parallel, |i, g| {
        let a_tape = actor.forward_tape(&obs[i])?;
        let a = a_tape.output();
        let mut upstream = vec![T::zero(); d];
        let mut value = T::zero();
        for t in terms {
            let mut x = t.inputs[i].clone();
            x[t.action_offset..t.action_offset + d].copy_from_slice(a);
            let q_tape = t.critic.forward_tape(&x)?;
            value = value + t.weight * q_tape.output()[0];
            let ga = t.critic.backward(&q_tape, &[t.weight], None)?;
            for (u, &v) in upstream.iter_mut().zip(&ga[t.action_offset..t.action_offset + d]) {
                *u = *u + v;
            }
        }
        actor.backward(&a_tape, &upstream, Some(g))?;
        Ok(value)
    })?;
    grad.iter_mut().for_each(|g| *g = *g / b);
    Ok((j / b, grad))
}

/// `dQ / d input` at `x`.
pub fn input_gradient<T: Real>(critic: &Mlp<T>, x: &[T]) -> Result<Vec<T>, MarlError> {
    let tape = critic.forward_tape(x)?;
    critic.backward(&tape, &[T::one()], None)
}

/// `r + gamma * min(q1, q2)`, or `r` on terminal transitions.
pub fn twin_target(reward: f64, gamma: f64, q1: f64, q2: f64, done: bool) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * q1.min(q2)
    }
}

/// `r + gamma * q`, or `r` on terminal transitions.
pub fn single_target(reward: f64, gamma: f64, q: f64, done: bool) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * q
    }
}

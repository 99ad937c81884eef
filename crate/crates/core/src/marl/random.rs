use rand::Rng;

use super::{AlgorithmId, Checkpoint, Dims, Learner, MarlError, Transition, UpdateStats};
use crate::rng::{self, Purpose, SimRng};
use crate::scalar::Precision;

/// Uniformly random actions in `[-1, 1]^d`; never learns.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    dims: Dims,
    rng: SimRng,
}

impl RandomPolicy {
    pub fn new(dims: Dims, seed: u64) -> Self {
        RandomPolicy { dims, rng: rng::stream(seed, Purpose::Exploration, 0) }
    }
}

impl Learner for RandomPolicy {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::Random
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn act(&mut self, obs: &[Vec<f64>], _explore: bool) -> Result<Vec<Vec<f64>>, MarlError> {
        if obs.len() != self.dims.agents {
            return Err(MarlError::Shape { what: "joint observation", expected: self.dims.agents, got: obs.len() });
        }
        Ok((0..self.dims.agents)
            .map(|_| (0..self.dims.action).map(|_| self.rng.random_range(-1.0..=1.0)).collect())
            .collect())
    }

    fn observe(&mut self, _t: Transition) -> Result<Option<UpdateStats>, MarlError> {
        Ok(None)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn checkpoint(&self) -> Checkpoint {
        let mut c = Checkpoint::new(AlgorithmId::Random, Precision::F64, self.dims);
        c.push_rng("exploration", &self.rng);
        c
    }

    fn restore(&mut self, ckpt: &Checkpoint) -> Result<(), MarlError> {
        ckpt.check(AlgorithmId::Random, Precision::F64, self.dims)?;
        self.rng = ckpt.rng("exploration")?;
        Ok(())
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

/// One joint transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Per-agent observations.
    pub obs: Vec<Vec<f64>>,
    /// Per-agent raw actions in `[-1, 1]^d`.
    pub actions: Vec<Vec<f64>>,
    pub local_rewards: Vec<f64>,
    pub global_reward: f64,
    pub next_obs: Vec<Vec<f64>>,
    /// Terminal transitions do not bootstrap.
    pub done: bool,
}

/// Fixed-capacity ring buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    data: Vec<Transition>,
    cursor: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, data: Vec::new(), cursor: 0, inserted: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Total insertions since creation.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        self.inserted += 1;
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    /// `batch` indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        assert!(!self.data.is_empty(), "sampling an empty buffer");
        (0..batch).map(|_| rng.random_range(0..self.data.len())).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.data.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(r: f64) -> Transition {
        Transition { obs: vec![], actions: vec![], local_rewards: vec![], global_reward: r, next_obs: vec![], done: false }
    }

    #[test]
    fn evicts_oldest() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(t(i as f64));
        }
        assert_eq!(b.len(), 3);
        let mut r: Vec<f64> = b.iter().map(|x| x.global_reward).collect();
        r.sort_by(f64::total_cmp);
        assert_eq!(r, vec![2.0, 3.0, 4.0]);
    }
}

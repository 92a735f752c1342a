use std::collections::VecDeque;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::mdp_env::Transition;
use crate::rng::SimRng;

pub const DEFAULT_REPLAY_CAPACITY: usize = 100_000;

/// Bounded FIFO of transitions; the oldest entry is evicted first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: VecDeque<Transition>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "replay capacity must be >= 1");
        ReplayMemory {
            capacity,
            buffer: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buffer.iter()
    }

    /// Uniform sample without replacement of `min(n, len)` transitions.
    pub fn sample(&self, n: usize, rng: &mut SimRng) -> Vec<Transition> {
        let k = n.min(self.buffer.len());
        sample(rng, self.buffer.len(), k)
            .into_iter()
            .map(|i| self.buffer[i].clone())
            .collect()
    }
}

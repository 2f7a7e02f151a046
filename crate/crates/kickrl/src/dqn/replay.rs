//! Bounded FIFO experience store with uniform sampling.

use crate::dqn::Transition;
use rand::Rng;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    buffer: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            buffer: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.buffer[i]
    }

    /// Appends a transition, evicting the oldest one at capacity.
    pub fn push(&mut self, t: Transition) {
        assert_eq!(
            t.obs.encoding, t.next_obs.encoding,
            "transition mixes observation encodings"
        );
        assert_eq!(t.obs.len(), t.next_obs.len());
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(t);
    }

    /// Draws `n` independent uniform indices (with replacement).
    pub fn sample_indices<R: Rng>(&self, n: usize, rng: &mut R, out: &mut Vec<usize>) {
        assert!(!self.buffer.is_empty(), "cannot sample an empty buffer");
        out.clear();
        out.extend((0..n).map(|_| rng.gen_range(0..self.buffer.len())));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obs::{Encoding, Observation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        let obs = Observation {
            values: vec![tag; 6],
            encoding: Encoding::Rcs,
        };
        Transition {
            obs: obs.clone(),
            action: 0,
            reward: tag,
            next_obs: obs,
            terminal: false,
        }
    }

    #[test]
    fn eviction_is_oldest_first() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..5 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), 3);
        let stored: Vec<f64> = (0..3).map(|i| buf.get(i).reward).collect();
        assert_eq!(stored, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    #[should_panic(expected = "mixes observation encodings")]
    fn mixed_encodings_rejected() {
        let mut buf = ReplayBuffer::new(4);
        let mut t = transition(1.0);
        t.next_obs = Observation {
            values: vec![0.0; 10],
            encoding: Encoding::Acs,
        };
        buf.push(t);
    }

    #[test]
    fn sampling_is_uniform_within_three_sigma() {
        let mut buf = ReplayBuffer::new(10);
        for i in 0..10 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0u32; 10];
        let mut idx = Vec::new();
        let draws = 100_000;
        buf.sample_indices(draws, &mut rng, &mut idx);
        for i in idx {
            counts[i] += 1;
        }
        let p = 0.1;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - draws as f64 * p).abs() < 3.0 * sigma,
                "count {c} outside 3 sigma of {}",
                draws as f64 * p
            );
        }
    }
}

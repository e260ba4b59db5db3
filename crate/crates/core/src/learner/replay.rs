use rand::Rng;

use super::LearnerError;
use crate::scalar::Scalar;

/// Columnar mini-batch; states are stored row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<T> {
    pub states: Vec<T>,
    pub actions: Vec<T>,
    pub rewards: Vec<T>,
    pub next_states: Vec<T>,
}

impl<T> Batch<T> {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Fixed-capacity ring of `(s, a, r, s')` transitions.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    state_dim: usize,
    len: usize,
    cursor: usize,
    states: Vec<T>,
    actions: Vec<T>,
    rewards: Vec<T>,
    next_states: Vec<T>,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize, state_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            state_dim,
            len: 0,
            cursor: 0,
            states: vec![T::zero(); capacity * state_dim],
            actions: vec![T::zero(); capacity],
            rewards: vec![T::zero(); capacity],
            next_states: vec![T::zero(); capacity * state_dim],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Stores a transition, overwriting the oldest one when full.
    pub fn push(&mut self, s: &[T], a: T, r: T, s_next: &[T]) {
        assert_eq!(s.len(), self.state_dim, "state dimension");
        assert_eq!(s_next.len(), self.state_dim, "next state dimension");
        let i = self.cursor;
        let d = self.state_dim;
        self.states[i * d..(i + 1) * d].copy_from_slice(s);
        self.next_states[i * d..(i + 1) * d].copy_from_slice(s_next);
        self.actions[i] = a;
        self.rewards[i] = r;
        self.cursor = (self.cursor + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Transition `i`, counted from the oldest one still stored.
    pub fn get(&self, i: usize) -> Option<(&[T], T, T, &[T])> {
        if i >= self.len {
            return None;
        }
        let slot = (self.cursor + self.capacity - self.len + i) % self.capacity;
        let d = self.state_dim;
        Some((
            &self.states[slot * d..(slot + 1) * d],
            self.actions[slot],
            self.rewards[slot],
            &self.next_states[slot * d..(slot + 1) * d],
        ))
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch<T>, LearnerError> {
        if self.len < n || n == 0 {
            return Err(LearnerError::NotWarm { have: self.len, need: n.max(1) });
        }
        let d = self.state_dim;
        let mut b = Batch {
            states: Vec::with_capacity(n * d),
            actions: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            next_states: Vec::with_capacity(n * d),
        };
        for _ in 0..n {
            let slot = rng.gen_range(0..self.len);
            b.states.extend_from_slice(&self.states[slot * d..(slot + 1) * d]);
            b.next_states.extend_from_slice(&self.next_states[slot * d..(slot + 1) * d]);
            b.actions.push(self.actions[slot]);
            b.rewards.push(self.rewards[slot]);
        }
        Ok(b)
    }
}

use rand::Rng;

use crate::env::Action;
use crate::nn::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Sampled transitions laid out for a batched forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionBatch {
    pub states: Matrix,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Matrix,
    pub dones: Vec<bool>,
    /// Slot each row was drawn from.
    pub slots: Vec<usize>,
}

impl TransitionBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn from_transitions(items: &[Transition]) -> Result<Self> {
        let states: Vec<&[f64]> = items.iter().map(|t| t.state.as_slice()).collect();
        let next: Vec<&[f64]> = items.iter().map(|t| t.next_state.as_slice()).collect();
        Ok(TransitionBatch {
            states: Matrix::from_rows(&states)?,
            actions: items.iter().map(|t| t.action.index()).collect(),
            rewards: items.iter().map(|t| t.reward).collect(),
            next_states: Matrix::from_rows(&next)?,
            dones: items.iter().map(|t| t.done).collect(),
            slots: (0..items.len()).collect(),
        })
    }
}

/// Fixed-capacity ring of transitions; once full, each store overwrites the
/// oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    width: usize,
    states: Vec<f64>,
    next_states: Vec<f64>,
    actions: Vec<Action>,
    rewards: Vec<f64>,
    dones: Vec<bool>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, width: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            width,
            states: Vec::new(),
            next_states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            dones: Vec::new(),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn store(&mut self, t: Transition) -> Result<()> {
        for v in [&t.state, &t.next_state] {
            if v.len() != self.width {
                return Err(Error::ShapeMismatch {
                    expected: self.width,
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("transition state".into()));
            }
        }
        if !t.reward.is_finite() {
            return Err(Error::NonFinite("transition reward".into()));
        }
        if self.len() < self.capacity {
            self.states.extend_from_slice(&t.state);
            self.next_states.extend_from_slice(&t.next_state);
            self.actions.push(t.action);
            self.rewards.push(t.reward);
            self.dones.push(t.done);
        } else {
            let (w, i) = (self.width, self.cursor);
            self.states[i * w..(i + 1) * w].copy_from_slice(&t.state);
            self.next_states[i * w..(i + 1) * w].copy_from_slice(&t.next_state);
            self.actions[i] = t.action;
            self.rewards[i] = t.reward;
            self.dones[i] = t.done;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Transition in storage slot `slot`.
    pub fn get(&self, slot: usize) -> Option<Transition> {
        (slot < self.len()).then(|| {
            let w = self.width;
            Transition {
                state: self.states[slot * w..(slot + 1) * w].to_vec(),
                action: self.actions[slot],
                reward: self.rewards[slot],
                next_state: self.next_states[slot * w..(slot + 1) * w].to_vec(),
                done: self.dones[slot],
            }
        })
    }

    /// Stored transitions, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = Transition> + '_ {
        let start = if self.len() < self.capacity { 0 } else { self.cursor };
        (0..self.len()).filter_map(move |k| self.get((start + k) % self.len()))
    }

    /// `batch_size` transitions drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<TransitionBatch> {
        if batch_size == 0 || self.len() < batch_size {
            return Err(Error::InsufficientTransitions {
                available: self.len(),
                requested: batch_size,
            });
        }
        let w = self.width;
        let slots: Vec<usize> = (0..batch_size).map(|_| rng.random_range(0..self.len())).collect();
        let mut states = Vec::with_capacity(batch_size * w);
        let mut next = Vec::with_capacity(batch_size * w);
        for &s in &slots {
            states.extend_from_slice(&self.states[s * w..(s + 1) * w]);
            next.extend_from_slice(&self.next_states[s * w..(s + 1) * w]);
        }
        Ok(TransitionBatch {
            states: Matrix::from_vec(batch_size, w, states)?,
            actions: slots.iter().map(|&s| self.actions[s].index()).collect(),
            rewards: slots.iter().map(|&s| self.rewards[s]).collect(),
            next_states: Matrix::from_vec(batch_size, w, next)?,
            dones: slots.iter().map(|&s| self.dones[s]).collect(),
            slots,
        })
    }
}

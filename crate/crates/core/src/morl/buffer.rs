use rand::Rng;

use crate::error::{check_len, Error, Result};

/// One environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: Vec<f64>,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Borrowed view of a stored transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionRef<'a> {
    pub state: &'a [f64],
    pub action: &'a [f64],
    pub reward: &'a [f64],
    pub next_state: &'a [f64],
    pub terminal: bool,
}

impl TransitionRef<'_> {
    pub fn to_owned(&self) -> Transition {
        Transition {
            state: self.state.to_vec(),
            action: self.action.to_vec(),
            reward: self.reward.to_vec(),
            next_state: self.next_state.to_vec(),
            terminal: self.terminal,
        }
    }
}

/// Fixed-capacity FIFO ring of transitions stored in flat arrays.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    reward_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    terminals: Vec<bool>,
    len: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize, reward_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("replay buffer capacity must be positive".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            state_dim,
            action_dim,
            reward_dim,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            terminals: Vec::new(),
            len: 0,
            cursor: 0,
        })
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

    pub fn push(&mut self, t: &Transition) -> Result<()> {
        check_len(self.state_dim, t.state.len())?;
        check_len(self.action_dim, t.action.len())?;
        check_len(self.reward_dim, t.reward.len())?;
        check_len(self.state_dim, t.next_state.len())?;
        if t.reward.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("reward"));
        }
        if self.len < self.capacity {
            self.states.extend_from_slice(&t.state);
            self.actions.extend_from_slice(&t.action);
            self.rewards.extend_from_slice(&t.reward);
            self.next_states.extend_from_slice(&t.next_state);
            self.terminals.push(t.terminal);
            self.len += 1;
        } else {
            let i = self.cursor;
            self.states[i * self.state_dim..(i + 1) * self.state_dim].copy_from_slice(&t.state);
            self.actions[i * self.action_dim..(i + 1) * self.action_dim].copy_from_slice(&t.action);
            self.rewards[i * self.reward_dim..(i + 1) * self.reward_dim].copy_from_slice(&t.reward);
            self.next_states[i * self.state_dim..(i + 1) * self.state_dim]
                .copy_from_slice(&t.next_state);
            self.terminals[i] = t.terminal;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn extend<'a, I: IntoIterator<Item = &'a Transition>>(&mut self, transitions: I) -> Result<()> {
        for t in transitions {
            self.push(t)?;
        }
        Ok(())
    }

    /// Slot `i` of the ring (not insertion order once the ring has wrapped).
    pub fn get(&self, i: usize) -> TransitionRef<'_> {
        assert!(i < self.len, "transition index {i} out of range");
        TransitionRef {
            state: &self.states[i * self.state_dim..(i + 1) * self.state_dim],
            action: &self.actions[i * self.action_dim..(i + 1) * self.action_dim],
            reward: &self.rewards[i * self.reward_dim..(i + 1) * self.reward_dim],
            next_state: &self.next_states[i * self.state_dim..(i + 1) * self.state_dim],
            terminal: self.terminals[i],
        }
    }

    /// Uniform sampling with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Empty("replay buffer"));
        }
        Ok((0..n).map(|_| rng.random_range(0..self.len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<TransitionRef<'_>>> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| self.get(i))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(x: f64) -> Transition {
        Transition {
            state: vec![x],
            action: vec![x],
            reward: vec![x, -x],
            next_state: vec![x + 1.0],
            terminal: false,
        }
    }

    #[test]
    fn ring_keeps_latest() {
        let mut b = ReplayBuffer::new(2, 1, 1, 2).unwrap();
        b.extend(&[transition(1.0), transition(2.0), transition(3.0)]).unwrap();
        assert_eq!(b.len(), 2);
        let mut held: Vec<f64> = (0..2).map(|i| b.get(i).state[0]).collect();
        held.sort_by(f64::total_cmp);
        assert_eq!(held, vec![2.0, 3.0]);
    }

    #[test]
    fn sampling() {
        let mut b = ReplayBuffer::new(10, 1, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(b.sample(1, &mut rng).is_err());
        b.push(&transition(7.0)).unwrap();
        let batch = b.sample(4, &mut rng).unwrap();
        assert_eq!(batch.len(), 4);
        assert!(batch.iter().all(|t| t.to_owned() == transition(7.0)));

        b.extend(&[transition(1.0), transition(2.0), transition(3.0)]).unwrap();
        let i1 = b.sample_indices(16, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let i2 = b.sample_indices(16, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(i1, i2);
    }

    #[test]
    fn push_validates_shapes() {
        let mut b = ReplayBuffer::new(10, 1, 1, 2).unwrap();
        let mut t = transition(1.0);
        t.reward.push(0.0);
        assert!(b.push(&t).is_err());
        let mut t = transition(1.0);
        t.reward[0] = f64::NAN;
        assert!(b.push(&t).is_err());
        assert!(ReplayBuffer::new(0, 1, 1, 1).is_err());
    }
}

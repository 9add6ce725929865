//! Deterministic point-mass tasks with conflicting velocity and energy objectives.
//!
//! State is `(x, y, vx, vy)`, starting at rest at the origin. Actions are
//! accelerations in `[-1, 1]^2`. The descriptor is the fraction of steps
//! spent at `x > 0` and at `y > 0`.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::morl::Transition;
use crate::neural::{Activation, Mlp, MlpLayout, Tape};
use crate::types::{Feature, FitnessVector, Genotype};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    /// Rewards `(vx, -|a|^2)`.
    PointVelocity2,
    /// Rewards `(vx, vy, -|a|^2)`.
    PointVelocity3,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::PointVelocity2 => "pointvel2",
            Task::PointVelocity3 => "pointvel3",
        }
    }

    pub fn spec(self) -> EnvSpec {
        EnvSpec {
            task: self,
            state_dim: 4,
            action_dim: 2,
            num_objectives: match self {
                Task::PointVelocity2 => 2,
                Task::PointVelocity3 => 3,
            },
            feature_dim: 2,
            episode_length: 100,
            dt: 0.1,
            vmax: 1.0,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pointvel2" => Ok(Task::PointVelocity2),
            "pointvel3" => Ok(Task::PointVelocity3),
            other => Err(Error::InvalidArgument(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub task: Task,
    pub state_dim: usize,
    pub action_dim: usize,
    pub num_objectives: usize,
    pub feature_dim: usize,
    pub episode_length: usize,
    pub dt: f64,
    pub vmax: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationResult {
    pub fitness: FitnessVector,
    pub feature: Feature,
    pub transitions: Vec<Transition>,
    pub env_steps: u64,
}

impl EnvSpec {
    pub fn reset(&self) -> Vec<f64> {
        vec![0.0; self.state_dim]
    }

    /// Policy architecture mapping this task's state to its action.
    pub fn policy_layout(&self, hidden: &[usize]) -> Result<MlpLayout> {
        MlpLayout::new(self.state_dim, hidden.to_vec(), self.action_dim, Activation::Tanh)
    }

    /// Advances one step; out-of-box actions are clipped first.
    pub fn step(&self, state: &[f64], action: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.state_dim, state.len())?;
        check_len(self.action_dim, action.len())?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        if action.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("action"));
        }
        let a = [action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0)];
        let vx = (state[2] + a[0] * self.dt).clamp(-self.vmax, self.vmax);
        let vy = (state[3] + a[1] * self.dt).clamp(-self.vmax, self.vmax);
        let next = vec![state[0] + vx * self.dt, state[1] + vy * self.dt, vx, vy];
        let energy = -(a[0] * a[0] + a[1] * a[1]);
        let reward = match self.task {
            Task::PointVelocity2 => vec![vx, energy],
            Task::PointVelocity3 => vec![vx, vy, energy],
        };
        Ok((next, reward))
    }

    /// Closed-loop rollout of the policy encoded by `genotype`.
    pub fn evaluate(&self, genotype: &Genotype) -> Result<EvaluationResult> {
        let layout = genotype.layout()?;
        if layout.input_dim != self.state_dim || layout.output_dim != self.action_dim {
            return Err(Error::LayoutMismatch(format!(
                "policy {} cannot drive {}",
                genotype.layout_id(),
                self.task
            )));
        }
        let policy = Mlp::from_flat(layout, genotype.params().to_vec())?;
        let mut tape = Tape::default();
        let mut state = self.reset();
        let mut fitness = vec![0.0; self.num_objectives];
        let mut above = [0usize; 2];
        let mut transitions = Vec::with_capacity(self.episode_length);
        for _ in 0..self.episode_length {
            policy.forward_tape(&state, &mut tape)?;
            let action: Vec<f64> = tape.output().iter().map(|a| a.clamp(-1.0, 1.0)).collect();
            let (next, reward) = self.step(&state, &action)?;
            for (f, r) in fitness.iter_mut().zip(&reward) {
                *f += r;
            }
            above[0] += (next[0] > 0.0) as usize;
            above[1] += (next[1] > 0.0) as usize;
            transitions.push(Transition {
                state: std::mem::replace(&mut state, next.clone()),
                action,
                reward,
                next_state: next,
                terminal: false,
            });
        }
        let t = self.episode_length as f64;
        Ok(EvaluationResult {
            fitness: FitnessVector::new(fitness)?,
            feature: Feature::new(vec![above[0] as f64 / t, above[1] as f64 / t])?,
            transitions,
            env_steps: self.episode_length as u64,
        })
    }

    /// Reference point (per-step minima times `T`) and ideal point (per-step
    /// maxima times `T`).
    pub fn reward_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.episode_length as f64;
        let speed = self.vmax * t;
        let energy = 2.0 * t;
        match self.task {
            Task::PointVelocity2 => (vec![-speed, -energy], vec![speed, 0.0]),
            Task::PointVelocity3 => (vec![-speed, -speed, -energy], vec![speed, speed, 0.0]),
        }
    }
}

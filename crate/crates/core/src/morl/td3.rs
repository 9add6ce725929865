use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::neural::{Activation, Adam, Mlp, MlpLayout, Tape};
use crate::types::Preference;

use super::buffer::{ReplayBuffer, TransitionRef};
use super::normalizer::RewardNormalizer;
use super::preference::PreferenceSource;

/// Twin-critic training hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Td3Params {
    pub discount: f64,
    pub tau: f64,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub policy_delay: usize,
    pub critic_lr: f64,
    pub actor_lr: f64,
    pub batch_size: usize,
    pub critic_steps: usize,
}

impl Default for Td3Params {
    fn default() -> Self {
        Td3Params {
            discount: 0.99,
            tau: 0.005,
            policy_noise: 0.2,
            noise_clip: 0.2,
            policy_delay: 2,
            critic_lr: 3e-4,
            actor_lr: 3e-4,
            batch_size: 256,
            critic_steps: 300,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    pub critic_updates: usize,
    pub actor_updates: usize,
    pub mean_critic_loss: f64,
    pub mean_actor_objective: f64,
}

/// Preference-conditioned actor with twin vector-valued critics and their
/// target copies.
///
/// Actor input is `[state, ω]`; critic input is `[state, action, ω]` and the
/// critic outputs one value per objective.
#[derive(Clone, Debug)]
pub struct PreferenceCriticPair {
    state_dim: usize,
    action_dim: usize,
    num_objectives: usize,
    pub actor: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub actor_target: Mlp,
    pub critic1_target: Mlp,
    pub critic2_target: Mlp,
    actor_opt: Adam,
    critic1_opt: Adam,
    critic2_opt: Adam,
    critic_updates: u64,
}

/// Scratch buffers for one forward/backward through `critic(policy(.))`.
#[derive(Default)]
pub(crate) struct SurrogateScratch {
    policy_tape: Tape,
    critic_tape: Tape,
    policy_input: Vec<f64>,
    critic_input: Vec<f64>,
    critic_input_grad: Vec<f64>,
}

/// Accumulates into `grad` the gradient of `ω·critic(s, policy(x), ω)` with
/// respect to the policy parameters, where `x` is `s` or `[s, ω]` depending on
/// `conditioned`. Returns the surrogate value.
pub(crate) fn surrogate_accumulate(
    policy: &Mlp,
    critic: &Mlp,
    state: &[f64],
    pref: &Preference,
    conditioned: bool,
    grad: &mut [f64],
    scratch: &mut SurrogateScratch,
) -> Result<f64> {
    scratch.policy_input.clear();
    scratch.policy_input.extend_from_slice(state);
    if conditioned {
        scratch.policy_input.extend_from_slice(pref);
    }
    policy.forward_tape(&scratch.policy_input, &mut scratch.policy_tape)?;
    let action_dim = policy.layout().output_dim;

    scratch.critic_input.clear();
    scratch.critic_input.extend_from_slice(state);
    scratch.critic_input.extend_from_slice(scratch.policy_tape.output());
    scratch.critic_input.extend_from_slice(pref);
    critic.forward_tape(&scratch.critic_input, &mut scratch.critic_tape)?;
    let value = pref.dot(scratch.critic_tape.output());

    scratch.critic_input_grad.resize(scratch.critic_input.len(), 0.0);
    critic.backward_tape(
        &mut scratch.critic_tape,
        pref,
        None,
        Some(&mut scratch.critic_input_grad),
    )?;
    let action_grad = &scratch.critic_input_grad[state.len()..state.len() + action_dim];
    policy.backward_tape(&mut scratch.policy_tape, action_grad, Some(grad), None)?;
    Ok(value)
}

/// Mean surrogate `ω·critic(s, policy(.), ω)` over `(state, ω)` samples and
/// its gradient with respect to the policy parameters.
pub fn surrogate_gradient(
    policy: &Mlp,
    critic: &Mlp,
    samples: &[(&[f64], &Preference)],
    conditioned: bool,
) -> Result<(f64, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::Empty("surrogate batch"));
    }
    let mut grad = vec![0.0; policy.params().len()];
    let mut scratch = SurrogateScratch::default();
    let mut total = 0.0;
    for (s, w) in samples {
        total += surrogate_accumulate(policy, critic, s, w, conditioned, &mut grad, &mut scratch)?;
    }
    let n = samples.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((total / n, grad))
}

fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    for (t, o) in target.params_mut().iter_mut().zip(online.params()) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}

impl PreferenceCriticPair {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        num_objectives: usize,
        actor_hidden: &[usize],
        critic_hidden: &[usize],
        params: &Td3Params,
        rng: &mut R,
    ) -> Result<Self> {
        let actor_layout = MlpLayout::new(
            state_dim + num_objectives,
            actor_hidden.to_vec(),
            action_dim,
            Activation::Tanh,
        )?;
        let critic_layout = MlpLayout::new(
            state_dim + action_dim + num_objectives,
            critic_hidden.to_vec(),
            num_objectives,
            Activation::Identity,
        )?;
        let actor = Mlp::random(actor_layout, rng);
        let critic1 = Mlp::random(critic_layout.clone(), rng);
        let critic2 = Mlp::random(critic_layout, rng);
        Ok(PreferenceCriticPair {
            state_dim,
            action_dim,
            num_objectives,
            actor_opt: Adam::new(actor.params().len(), params.actor_lr),
            critic1_opt: Adam::new(critic1.params().len(), params.critic_lr),
            critic2_opt: Adam::new(critic2.params().len(), params.critic_lr),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            critic_updates: 0,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn num_objectives(&self) -> usize {
        self.num_objectives
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    /// `ω·Q1(s, a | ω)`.
    pub fn scalar_q(&self, state: &[f64], action: &[f64], pref: &Preference) -> Result<f64> {
        let input = [state, action, pref.as_slice()].concat();
        Ok(pref.dot(&self.critic1.forward(&input)?))
    }

    /// Actor action for `state` under preference `pref`.
    pub fn act(&self, state: &[f64], pref: &Preference) -> Result<Vec<f64>> {
        self.actor.forward(&[state, pref.as_slice()].concat())
    }

    /// One regression step of both critics towards the shared scalar target
    /// `ω·r̃ + γ (1 - done) min_i ω·Q'_i(s', ã | ω)`. Returns the loss before the step.
    pub fn critic_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[TransitionRef<'_>],
        prefs: &PreferenceSource,
        normalizer: &RewardNormalizer,
        params: &Td3Params,
        rng: &mut R,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("critic batch"));
        }
        let m = self.num_objectives;
        let n = batch.len() as f64;
        let mut grad1 = vec![0.0; self.critic1.params().len()];
        let mut grad2 = vec![0.0; self.critic2.params().len()];
        let mut tape = Tape::default();
        let mut input = Vec::new();
        let mut reward = Vec::with_capacity(m);
        let mut upstream = vec![0.0; m];
        let mut loss = 0.0;

        for t in batch {
            let pref = prefs.draw(rng, m);
            reward.clear();
            reward.extend_from_slice(t.reward);
            normalizer.apply_in_place(&mut reward);
            let mut target = pref.dot(&reward);
            if !t.terminal {
                input.clear();
                input.extend_from_slice(t.next_state);
                input.extend_from_slice(&pref);
                let mut next_action = self.actor_target.forward(&input)?;
                for a in &mut next_action {
                    let noise: f64 = rng.sample::<f64, _>(StandardNormal) * params.policy_noise;
                    *a = (*a + noise.clamp(-params.noise_clip, params.noise_clip)).clamp(-1.0, 1.0);
                }
                input.clear();
                input.extend_from_slice(t.next_state);
                input.extend_from_slice(&next_action);
                input.extend_from_slice(&pref);
                let q1 = pref.dot(&self.critic1_target.forward(&input)?);
                let q2 = pref.dot(&self.critic2_target.forward(&input)?);
                target += params.discount * q1.min(q2);
            }

            input.clear();
            input.extend_from_slice(t.state);
            input.extend_from_slice(t.action);
            input.extend_from_slice(&pref);
            for (critic, grad) in [(&self.critic1, &mut grad1), (&self.critic2, &mut grad2)] {
                critic.forward_tape(&input, &mut tape)?;
                let err = pref.dot(tape.output()) - target;
                loss += err * err / (2.0 * n);
                for (u, w) in upstream.iter_mut().zip(pref.iter()) {
                    *u = err * w / n;
                }
                critic.backward_tape(&mut tape, &upstream, Some(grad), None)?;
            }
        }
        self.critic1_opt.descend(self.critic1.params_mut(), &grad1)?;
        self.critic2_opt.descend(self.critic2.params_mut(), &grad2)?;
        self.critic_updates += 1;
        Ok(loss)
    }

    /// One ascent step of the actor on `ω·Q1(s, π(s|ω) | ω)`. Returns the
    /// batch-mean surrogate before the step.
    pub fn actor_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[TransitionRef<'_>],
        prefs: &PreferenceSource,
        rng: &mut R,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("actor batch"));
        }
        let mut grad = vec![0.0; self.actor.params().len()];
        let mut scratch = SurrogateScratch::default();
        let mut total = 0.0;
        for t in batch {
            let pref = prefs.draw(rng, self.num_objectives);
            total += surrogate_accumulate(
                &self.actor,
                &self.critic1,
                t.state,
                &pref,
                true,
                &mut grad,
                &mut scratch,
            )?;
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        self.actor_opt.ascend(self.actor.params_mut(), &grad)?;
        Ok(total / n)
    }

    /// Polyak averaging of all three target networks.
    pub fn soft_update_targets(&mut self, tau: f64) {
        soft_update(&mut self.actor_target, &self.actor, tau);
        soft_update(&mut self.critic1_target, &self.critic1, tau);
        soft_update(&mut self.critic2_target, &self.critic2, tau);
    }

    /// `critic_steps` critic updates; every `policy_delay`-th is followed by an
    /// actor update and a soft target update.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer,
        normalizer: &RewardNormalizer,
        prefs: &PreferenceSource,
        params: &Td3Params,
        rng: &mut R,
    ) -> Result<TrainStats> {
        let mut stats = TrainStats::default();
        let delay = params.policy_delay.max(1) as u64;
        for _ in 0..params.critic_steps {
            let batch = buffer.sample(params.batch_size, rng)?;
            stats.mean_critic_loss += self.critic_update(&batch, prefs, normalizer, params, rng)?;
            stats.critic_updates += 1;
            if self.critic_updates.is_multiple_of(delay) {
                stats.mean_actor_objective += self.actor_update(&batch, prefs, rng)?;
                stats.actor_updates += 1;
                self.soft_update_targets(params.tau);
            }
        }
        if stats.critic_updates > 0 {
            stats.mean_critic_loss /= stats.critic_updates as f64;
        }
        if stats.actor_updates > 0 {
            stats.mean_actor_objective /= stats.actor_updates as f64;
        }
        Ok(stats)
    }
}

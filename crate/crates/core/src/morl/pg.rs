use rand::Rng;

use crate::error::{Error, Result};
use crate::neural::{Adam, Mlp};
use crate::types::{Genotype, Preference};

use super::buffer::ReplayBuffer;
use super::td3::{surrogate_accumulate, PreferenceCriticPair, SurrogateScratch};

/// Budget of a gradient-based variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PgParams {
    pub steps: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for PgParams {
    fn default() -> Self {
        PgParams {
            steps: 100,
            learning_rate: 1e-3,
            batch_size: 256,
        }
    }
}

/// Adam ascent of a policy genotype on `ω·Q1(s, π_θ(s) | ω)`.
///
/// Each step draws an independent minibatch of states from `buffer`. The
/// critic and the parent genotype are left untouched.
pub fn pg_variation<R: Rng + ?Sized>(
    genotype: &Genotype,
    pref: &Preference,
    pair: &PreferenceCriticPair,
    buffer: &ReplayBuffer,
    params: PgParams,
    rng: &mut R,
) -> Result<Genotype> {
    if buffer.is_empty() {
        return Err(Error::Empty("replay buffer"));
    }
    if pref.len() != pair.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: pair.num_objectives(),
            got: pref.len(),
        });
    }
    let layout = genotype.layout()?;
    if layout.input_dim != pair.state_dim() || layout.output_dim != pair.action_dim() {
        return Err(Error::LayoutMismatch(format!(
            "policy {} does not match a {}-state {}-action task",
            genotype.layout_id(),
            pair.state_dim(),
            pair.action_dim()
        )));
    }
    if params.steps == 0 {
        return Ok(genotype.clone());
    }

    let mut policy = Mlp::from_flat(layout.clone(), genotype.params().to_vec())?;
    let mut adam = Adam::new(policy.params().len(), params.learning_rate);
    let mut grad = vec![0.0; policy.params().len()];
    let mut scratch = SurrogateScratch::default();
    let batch = params.batch_size.max(1);
    for _ in 0..params.steps {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for idx in buffer.sample_indices(batch, rng)? {
            let state = buffer.get(idx).state;
            surrogate_accumulate(&policy, &pair.critic1, state, pref, false, &mut grad, &mut scratch)?;
        }
        grad.iter_mut().for_each(|g| *g /= batch as f64);
        adam.ascend(policy.params_mut(), &grad)?;
    }
    Genotype::new(policy.into_flat(), &layout)
}

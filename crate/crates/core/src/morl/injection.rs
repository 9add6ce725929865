use crate::error::{Error, Result};
use crate::neural::{Mlp, MlpLayout};
use crate::types::{Genotype, Preference};

/// Folds a fixed preference into the first-layer bias of a
/// preference-conditioned actor, producing a state-only policy genotype.
///
/// With first-layer weights `[W_s | W_ω]` and bias `B`, the policy keeps
/// `W_s` and uses `B + W_ω ω` as its bias. Deeper layers are copied.
pub fn inject_actor(actor: &Mlp, pref: &Preference, state_dim: usize) -> Result<Genotype> {
    let layout = actor.layout();
    let m = pref.len();
    if layout.input_dim != state_dim + m {
        return Err(Error::LayoutMismatch(format!(
            "actor input width {} is not {state_dim} state + {m} preference inputs",
            layout.input_dim
        )));
    }
    let policy_layout = MlpLayout::new(
        state_dim,
        layout.hidden_dims.clone(),
        layout.output_dim,
        layout.output_activation,
    )?;
    let mut policy = Mlp::zeros(policy_layout.clone());

    let (weights, bias) = actor.layer(0);
    let (new_weights, new_bias) = policy.layer_mut(0);
    let fan_in = layout.input_dim;
    for (o, row) in weights.chunks_exact(fan_in).enumerate() {
        let (w_state, w_pref) = row.split_at(state_dim);
        new_weights[o * state_dim..(o + 1) * state_dim].copy_from_slice(w_state);
        new_bias[o] = bias[o] + w_pref.iter().zip(pref.iter()).map(|(w, p)| w * p).sum::<f64>();
    }
    let first_len = policy_layout.widths()[1] * (state_dim + 1);
    let actor_first_len = weights.len() + bias.len();
    policy.params_mut()[first_len..].copy_from_slice(&actor.params()[actor_first_len..]);
    Genotype::new(policy.into_flat(), &policy_layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Activation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_evaluated_bias() {
        let layout = MlpLayout::new(3, vec![], 1, Activation::Tanh).unwrap();
        let actor = Mlp::from_flat(layout, vec![1.0, 2.0, 3.0, 0.5]).unwrap();
        let pref = Preference::new(vec![0.25, 0.75]).unwrap();
        let g = inject_actor(&actor, &pref, 1).unwrap();
        assert_eq!(g.params(), &[1.0, 3.25]);
        assert_eq!(g.layout_id(), "mlp:1-1:tanh");
    }

    #[test]
    fn one_hot_selects_a_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let layout = MlpLayout::new(4 + 3, vec![5], 2, Activation::Tanh).unwrap();
        let actor = Mlp::random(layout, &mut rng);
        let (w, b) = actor.layer(0);
        for j in 0..3 {
            let g = inject_actor(&actor, &Preference::one_hot(3, j), 4).unwrap();
            let policy = Mlp::from_flat(g.layout().unwrap(), g.into_params()).unwrap();
            let (_, new_b) = policy.layer(0);
            for o in 0..5 {
                assert_eq!(new_b[o], b[o] + w[o * 7 + 4 + j]);
            }
        }
    }

    #[test]
    fn injected_policy_matches_conditioned_actor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layout = MlpLayout::new(4 + 2, vec![16, 8], 2, Activation::Tanh).unwrap();
        let actor = Mlp::random(layout, &mut rng);
        let pref = crate::morl::sample_preference(&mut rng, 2);
        let g = inject_actor(&actor, &pref, 4).unwrap();
        let policy = Mlp::from_flat(g.layout().unwrap(), g.into_params()).unwrap();
        for _ in 0..100 {
            let s: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = policy.forward(&s).unwrap();
            let b = actor.forward(&[s.as_slice(), pref.as_slice()].concat()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_wrong_widths() {
        let layout = MlpLayout::new(3, vec![], 1, Activation::Tanh).unwrap();
        let actor = Mlp::zeros(layout);
        let pref = Preference::new(vec![0.5, 0.5]).unwrap();
        assert!(inject_actor(&actor, &pref, 2).is_err());
    }
}

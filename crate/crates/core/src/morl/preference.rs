use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::types::{Preference, Solution};

/// Uniform draw from the probability simplex with `m` vertices.
pub fn sample_preference<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Preference {
    assert!(m >= 1, "preferences need at least one objective");
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let weights = if total > 0.0 {
        draws.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / m as f64; m]
    };
    Preference::new(weights).expect("normalized exponential draws lie on the simplex")
}

/// `n_a - m` uniform preferences followed by the `m` one-hot preferences.
pub fn actor_preference_batch<R: Rng + ?Sized>(n_a: usize, m: usize, rng: &mut R) -> Result<Vec<Preference>> {
    if n_a < m {
        return Err(Error::InvalidArgument(format!(
            "actor batch of {n_a} cannot hold the {m} one-hot preferences"
        )));
    }
    let mut batch: Vec<Preference> = (0..n_a - m).map(|_| sample_preference(rng, m)).collect();
    batch.extend((0..m).map(|j| Preference::one_hot(m, j)));
    Ok(batch)
}

/// Where training draws its per-transition preferences from.
#[derive(Clone, Debug, PartialEq)]
pub enum PreferenceSource {
    Uniform,
    Fixed(Preference),
}

impl PreferenceSource {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Preference {
        match self {
            PreferenceSource::Uniform => sample_preference(rng, m),
            PreferenceSource::Fixed(p) => p.clone(),
        }
    }
}

/// Strategy choosing the preference each gradient-variation offspring is
/// conditioned on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgPreferenceSampler {
    Uniform,
    /// Reuse the parent's stored preference, falling back to a uniform draw.
    KeepParent,
    /// Cycle through the one-hot preferences in equal proportion.
    OneHot,
}

impl PgPreferenceSampler {
    pub fn assign<R: Rng + ?Sized>(&self, parents: &[Solution], m: usize, rng: &mut R) -> Vec<Preference> {
        parents
            .iter()
            .enumerate()
            .map(|(i, parent)| match self {
                PgPreferenceSampler::Uniform => sample_preference(rng, m),
                PgPreferenceSampler::KeepParent => parent
                    .pref
                    .clone()
                    .unwrap_or_else(|| sample_preference(rng, m)),
                PgPreferenceSampler::OneHot => Preference::one_hot(m, i % m),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_simplex_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for m in [2usize, 3] {
            let n = 100_000;
            let mut mean = vec![0.0; m];
            for _ in 0..n {
                let p = sample_preference(&mut rng, m);
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(p.iter().all(|&w| w >= 0.0));
                for (acc, w) in mean.iter_mut().zip(p.iter()) {
                    *acc += w / n as f64;
                }
            }
            for v in mean {
                assert!((v - 1.0 / m as f64).abs() < 0.005, "m={m} mean {v}");
            }
        }
    }

    #[test]
    fn actor_batch_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = actor_preference_batch(64, 2, &mut rng).unwrap();
        assert_eq!(batch.len(), 64);
        assert_eq!(batch[62].as_slice(), &[1.0, 0.0]);
        assert_eq!(batch[63].as_slice(), &[0.0, 1.0]);

        let batch = actor_preference_batch(3, 3, &mut rng).unwrap();
        let expected = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for (p, e) in batch.iter().zip(expected) {
            assert_eq!(p.as_slice(), &e);
        }
        assert!(actor_preference_batch(1, 2, &mut rng).is_err());
    }

    #[test]
    fn one_hot_sampler_cycles_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let parents = vec![crate::archive::tests::solution(&[1.0, 1.0, 1.0], &[0.5]); 6];
        let prefs = PgPreferenceSampler::OneHot.assign(&parents, 3, &mut rng);
        for (i, p) in prefs.iter().enumerate() {
            assert_eq!(p, &Preference::one_hot(3, i % 3));
        }
    }

    #[test]
    fn keep_parent_falls_back_to_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut with_pref = crate::archive::tests::solution(&[1.0, 1.0], &[0.5]);
        let kept = Preference::new(vec![0.2, 0.8]).unwrap();
        with_pref.pref = Some(kept.clone());
        let without = crate::archive::tests::solution(&[1.0, 1.0], &[0.5]);
        let prefs = PgPreferenceSampler::KeepParent.assign(&[with_pref, without], 2, &mut rng);
        assert_eq!(prefs[0], kept);
        assert!((prefs[1].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

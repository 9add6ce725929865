//! Genetic variation and parent selection from the archive.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::archive::MoArchive;
use crate::error::{Error, Result};
use crate::pareto::crowding_distances;
use crate::types::{Genotype, Solution};

/// Iso+LineDD noise scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaParams {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            sigma1: 0.005,
            sigma2: 0.05,
        }
    }
}

/// `parent1 + sigma1 * g + sigma2 * u * (parent2 - parent1)` with `g` an
/// isotropic normal vector and `u` a scalar normal draw.
pub fn iso_line_dd<R: Rng + ?Sized>(
    parent1: &Genotype,
    parent2: &Genotype,
    params: GaParams,
    rng: &mut R,
) -> Result<Genotype> {
    if parent1.layout_id() != parent2.layout_id() || parent1.len() != parent2.len() {
        return Err(Error::LayoutMismatch(format!(
            "cannot cross {} with {}",
            parent1.layout_id(),
            parent2.layout_id()
        )));
    }
    let u: f64 = rng.sample(StandardNormal);
    let child: Vec<f64> = parent1
        .params()
        .iter()
        .zip(parent2.params())
        .map(|(x, y)| {
            let g: f64 = rng.sample(StandardNormal);
            x + params.sigma1 * g + params.sigma2 * u * (y - x)
        })
        .collect();
    Genotype::from_layout_id(parent1.layout_id(), child)
}

/// Within-front weighting used when drawing parents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Probability proportional to capped crowding distance.
    Crowding,
    Uniform,
}

/// Draws `n` solutions: a uniformly chosen occupied cell, then a member of
/// its front weighted according to `mode`.
pub fn select<R: Rng + ?Sized>(archive: &MoArchive, n: usize, mode: Selection, rng: &mut R) -> Result<Vec<Solution>> {
    let cells = archive.cells_nonempty();
    if cells.is_empty() {
        return Err(Error::Empty("archive"));
    }
    let mut samplers: Vec<Option<WeightedIndex<f64>>> = vec![None; cells.len()];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..cells.len());
        let front = &archive.fronts()[cells[c]];
        let idx = match mode {
            Selection::Uniform => rng.random_range(0..front.len()),
            Selection::Crowding => {
                let sampler = samplers[c].get_or_insert_with(|| {
                    let scores = crowding_distances(&front.fitnesses());
                    WeightedIndex::new(&scores)
                        .unwrap_or_else(|_| WeightedIndex::new(vec![1.0; front.len()]).unwrap())
                });
                sampler.sample(rng)
            }
        };
        out.push(front.members()[idx].clone());
    }
    Ok(out)
}

pub fn crowding_select<R: Rng + ?Sized>(archive: &MoArchive, n: usize, rng: &mut R) -> Result<Vec<Solution>> {
    select(archive, n, Selection::Crowding, rng)
}

pub fn uniform_select<R: Rng + ?Sized>(archive: &MoArchive, n: usize, rng: &mut R) -> Result<Vec<Solution>> {
    select(archive, n, Selection::Uniform, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::tests::solution;
    use crate::neural::{Activation, MlpLayout};
    use crate::tessellation::Tessellation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn genotype(values: Vec<f64>) -> Genotype {
        let layout = MlpLayout::new(values.len() - 1, vec![], 1, Activation::Tanh).unwrap();
        Genotype::new(values, &layout).unwrap()
    }

    fn front_archive(fitnesses: &[[f64; 2]]) -> MoArchive {
        let t = Tessellation::from_centroids(vec![vec![0.5]]).unwrap();
        let mut a = MoArchive::new(t, 50).unwrap();
        for f in fitnesses {
            a.insert(solution(f, &[0.5])).unwrap();
        }
        a
    }

    fn frequencies(archive: &MoArchive, mode: Selection, draws: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let picks = select(archive, draws, mode, &mut rng).unwrap();
        let members = archive.fronts()[0].members();
        let mut counts = vec![0usize; members.len()];
        for p in &picks {
            counts[members.iter().position(|m| m == p).unwrap()] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn zero_noise_is_a_fixed_point() {
        let p = genotype(vec![0.3, -1.2, 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let child = iso_line_dd(&p, &p, GaParams { sigma1: 0.0, sigma2: 0.05 }, &mut rng).unwrap();
        assert_eq!(child, p);
    }

    #[test]
    fn iso_noise_has_requested_scale() {
        let p1 = genotype(vec![1.0, -2.0]);
        let p2 = genotype(vec![5.0, 3.0]);
        let params = GaParams { sigma1: 0.005, sigma2: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut sum = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..n {
            let c = iso_line_dd(&p1, &p2, params, &mut rng).unwrap();
            for j in 0..2 {
                let d = c.params()[j] - p1.params()[j];
                sum[j] += d;
                sq[j] += d * d;
            }
        }
        for j in 0..2 {
            let mean = sum[j] / n as f64;
            let std = (sq[j] / n as f64 - mean * mean).sqrt();
            assert!((std / 0.005 - 1.0).abs() < 0.05, "std {std}");
            // mean within 3 standard errors of parent1
            assert!(mean.abs() < 3.0 * 0.005 / (n as f64).sqrt(), "mean {mean}");
        }
    }

    #[test]
    fn deterministic_children_and_layout_check() {
        let p1 = genotype(vec![1.0, 2.0]);
        let p2 = genotype(vec![0.0, -1.0]);
        let a = iso_line_dd(&p1, &p2, GaParams::default(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = iso_line_dd(&p1, &p2, GaParams::default(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        let other = genotype(vec![1.0, 2.0, 3.0]);
        assert!(iso_line_dd(&p1, &other, GaParams::default(), &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn crowding_selection_frequencies() {
        let a = front_archive(&[[0.0, 1.0], [0.4, 0.6], [1.0, 0.0]]);
        let freq = frequencies(&a, Selection::Crowding, 100_000);
        let expected = [0.4, 0.2, 0.4];
        for (f, e) in freq.iter().zip(expected) {
            assert!((f - e).abs() < 0.01, "{freq:?}");
        }
        let freq = frequencies(&a, Selection::Uniform, 100_000);
        for f in freq {
            assert!((f - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn selection_edge_cases() {
        let a = front_archive(&[[1.0, 1.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let picks = crowding_select(&a, 10, &mut rng).unwrap();
        assert!(picks.iter().all(|p| p.fitness.as_slice() == [1.0, 1.0]));

        let two = front_archive(&[[1.0, 0.0], [0.0, 1.0]]);
        for f in frequencies(&two, Selection::Uniform, 100_000) {
            assert!((f - 0.5).abs() < 0.01);
        }

        let empty = front_archive(&[]);
        assert!(uniform_select(&empty, 1, &mut rng).is_err());
        assert!(crowding_select(&empty, 1, &mut rng).is_err());
    }
}

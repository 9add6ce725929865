//! Archive-level quality metrics and cross-run fitness normalization.

use std::fmt::Write as _;

use crate::archive::MoArchive;
use crate::error::{check_len, Error, Result};
use crate::pareto::{hypervolume, non_dominated_filter, sparsity};
use crate::types::Solution;

pub const CSV_HEADER: &str =
    "iteration,env_steps,moqd_score,moqd_sparsity,global_hypervolume,global_sparsity,max_sum_scores,coverage";

/// Per-objective affine map onto `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationBounds {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormalizationBounds {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        check_len(min.len(), max.len())?;
        if min.iter().zip(&max).any(|(lo, hi)| lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::InvalidArgument("normalization needs min < max per objective".into()));
        }
        Ok(NormalizationBounds { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn normalize(&self, fitness: &[f64]) -> Vec<f64> {
        fitness
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(f, (lo, hi))| (f - lo) / (hi - lo))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub iteration: usize,
    pub env_steps: u64,
    pub moqd_score: f64,
    pub moqd_sparsity: f64,
    pub global_hypervolume: f64,
    pub global_sparsity: f64,
    pub max_sum_scores: Option<f64>,
    pub coverage: f64,
}

impl MetricsRow {
    pub fn compute(
        archive: &MoArchive,
        reference: &[f64],
        bounds: &NormalizationBounds,
        iteration: usize,
        env_steps: u64,
    ) -> Result<Self> {
        Ok(MetricsRow {
            iteration,
            env_steps,
            moqd_score: moqd_score(archive, reference)?,
            moqd_sparsity: moqd_sparsity(archive, bounds),
            global_hypervolume: global_hypervolume(archive, reference)?,
            global_sparsity: global_sparsity(archive, bounds),
            max_sum_scores: max_sum_scores(archive),
            coverage: coverage(archive),
        })
    }

    /// One CSV line without the trailing newline. Missing values are empty.
    pub fn to_csv(&self) -> String {
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},",
            self.iteration,
            self.env_steps,
            self.moqd_score,
            self.moqd_sparsity,
            self.global_hypervolume,
            self.global_sparsity
        );
        if let Some(v) = self.max_sum_scores {
            let _ = write!(line, "{v}");
        }
        let _ = write!(line, ",{}", self.coverage);
        line
    }
}

/// Sum of per-cell hypervolumes.
pub fn moqd_score(archive: &MoArchive, reference: &[f64]) -> Result<f64> {
    archive
        .fronts()
        .iter()
        .filter(|f| !f.is_empty())
        .try_fold(0.0, |acc, f| Ok(acc + hypervolume(&f.fitnesses(), reference)?))
}

/// Per-cell hypervolumes, zero for empty cells.
pub fn cell_hypervolumes(archive: &MoArchive, reference: &[f64]) -> Result<Vec<f64>> {
    archive
        .fronts()
        .iter()
        .map(|f| hypervolume(&f.fitnesses(), reference))
        .collect()
}

/// Mean normalized sparsity over all `k` cells; empty cells count as 0.
pub fn moqd_sparsity(archive: &MoArchive, bounds: &NormalizationBounds) -> f64 {
    let total: f64 = archive
        .fronts()
        .iter()
        .map(|f| {
            let normalized: Vec<Vec<f64>> =
                f.members().iter().map(|s| bounds.normalize(&s.fitness)).collect();
            sparsity(&normalized)
        })
        .sum();
    total / archive.num_cells() as f64
}

/// Non-dominated subset of every stored solution, ignoring cells.
pub fn global_front(archive: &MoArchive) -> Vec<&Solution> {
    let all: Vec<&Solution> = archive.solutions().collect();
    let fitnesses: Vec<&[f64]> = all.iter().map(|s| s.fitness.as_slice()).collect();
    non_dominated_filter(&fitnesses)
        .into_iter()
        .map(|i| all[i])
        .collect()
}

pub fn global_hypervolume(archive: &MoArchive, reference: &[f64]) -> Result<f64> {
    let front: Vec<&[f64]> = global_front(archive)
        .iter()
        .map(|s| s.fitness.as_slice())
        .collect();
    hypervolume(&front, reference)
}

pub fn global_sparsity(archive: &MoArchive, bounds: &NormalizationBounds) -> f64 {
    let normalized: Vec<Vec<f64>> = global_front(archive)
        .iter()
        .map(|s| bounds.normalize(&s.fitness))
        .collect();
    sparsity(&normalized)
}

/// Largest objective sum over stored solutions; `None` for an empty archive.
pub fn max_sum_scores(archive: &MoArchive) -> Option<f64> {
    archive.solutions().map(|s| s.fitness.sum()).reduce(f64::max)
}

pub fn coverage(archive: &MoArchive) -> f64 {
    archive.cells_nonempty().len() as f64 / archive.num_cells() as f64
}

/// Per-objective min and max over every solution of every archive.
///
/// A degenerate objective (min = max) has its max raised by 1.
pub fn compute_bounds<'a, I>(archives: I) -> Result<NormalizationBounds>
where
    I: IntoIterator<Item = &'a MoArchive>,
{
    let mut min: Vec<f64> = Vec::new();
    let mut max: Vec<f64> = Vec::new();
    for archive in archives {
        for s in archive.solutions() {
            if min.is_empty() {
                min = s.fitness.to_vec();
                max = s.fitness.to_vec();
                continue;
            }
            check_len(min.len(), s.fitness.len())?;
            for (j, v) in s.fitness.iter().enumerate() {
                min[j] = min[j].min(*v);
                max[j] = max[j].max(*v);
            }
        }
    }
    if min.is_empty() {
        return Err(Error::Empty("archive collection"));
    }
    for (lo, hi) in min.iter().zip(max.iter_mut()) {
        if lo == hi {
            *hi += 1.0;
        }
    }
    NormalizationBounds::new(min, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::tests::solution;
    use crate::tessellation::Tessellation;

    fn archive(k: usize, cells: &[(usize, [f64; 2])]) -> MoArchive {
        let centroids = (0..k).map(|i| vec![(i as f64 + 0.5) / k as f64]).collect();
        let t = Tessellation::from_centroids(centroids).unwrap();
        let mut a = MoArchive::new(t, 50).unwrap();
        for (cell, f) in cells {
            let x = (*cell as f64 + 0.5) / k as f64;
            a.insert(solution(f, &[x])).unwrap();
        }
        a
    }

    fn unit_bounds() -> NormalizationBounds {
        NormalizationBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn moqd_score_examples() {
        let empty = moqd_score(&archive(4, &[]), &[0.0, 0.0]).unwrap();
        assert_eq!(empty.to_string(), "0");
        let a = archive(4, &[(0, [1.0, 1.0]), (2, [1.0, 1.0])]);
        assert_eq!(moqd_score(&a, &[0.0, 0.0]).unwrap(), 2.0);
        let a = archive(4, &[(1, [1.0, 3.0]), (1, [2.0, 2.0]), (1, [3.0, 1.0])]);
        assert!((moqd_score(&a, &[0.0, 0.0]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn moqd_sparsity_examples() {
        assert_eq!(moqd_sparsity(&archive(2, &[]), &unit_bounds()), 0.0);
        let a = archive(2, &[(0, [0.0, 1.0]), (0, [1.0, 0.0])]);
        assert!((moqd_sparsity(&a, &unit_bounds()) - 1.0).abs() < 1e-12);
        let a = archive(3, &[(0, [0.2, 1.0]), (1, [1.0, 0.0]), (2, [0.5, 0.5])]);
        assert_eq!(moqd_sparsity(&a, &unit_bounds()), 0.0);
    }

    #[test]
    fn global_front_examples() {
        let a = archive(2, &[(0, [1.0, 2.0]), (1, [2.0, 1.0])]);
        assert_eq!(global_front(&a).len(), 2);
        let a = archive(2, &[(0, [1.0, 1.0]), (1, [2.0, 2.0])]);
        let g = global_front(&a);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].fitness.as_slice(), &[2.0, 2.0]);
        assert!(global_front(&archive(2, &[])).is_empty());
    }

    #[test]
    fn global_metrics_examples() {
        let a = archive(2, &[(0, [1.0, 1.0])]);
        assert_eq!(global_hypervolume(&a, &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(global_sparsity(&a, &unit_bounds()), 0.0);

        let a = archive(3, &[(0, [0.0, 1.0]), (1, [0.5, 0.5]), (2, [1.0, 0.0]), (2, [0.2, 0.2])]);
        assert!((global_sparsity(&a, &unit_bounds()) - 0.5).abs() < 1e-12);

        let a = archive(3, &[(0, [1.0, 3.0]), (1, [2.0, 2.0]), (2, [3.0, 1.0]), (2, [1.0, 0.5])]);
        assert!((global_hypervolume(&a, &[0.0, 0.0]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn max_sum_and_coverage() {
        let a = archive(4, &[(0, [1.0, 2.0]), (1, [2.0, 0.0])]);
        assert_eq!(max_sum_scores(&a), Some(3.0));
        assert_eq!(coverage(&a), 0.5);
        assert_eq!(max_sum_scores(&archive(4, &[(3, [5.0, -1.0])])), Some(4.0));
        assert_eq!(max_sum_scores(&archive(4, &[])), None);
        assert_eq!(coverage(&archive(128, &[])), 0.0);
        let half: Vec<(usize, [f64; 2])> = (0..64).map(|c| (2 * c, [1.0, 1.0])).collect();
        assert_eq!(coverage(&archive(128, &half)), 0.5);
        let full: Vec<(usize, [f64; 2])> = (0..128).map(|c| (c, [1.0, 1.0])).collect();
        assert_eq!(coverage(&archive(128, &full)), 1.0);
    }

    #[test]
    fn bounds_examples() {
        let a = archive(2, &[(0, [0.0, 10.0]), (1, [2.0, 4.0])]);
        let b = compute_bounds([&a]).unwrap();
        assert_eq!((b.min(), b.max()), (&[0.0, 4.0][..], &[2.0, 10.0][..]));

        let a = archive(1, &[(0, [1.0, 1.0])]);
        let c = archive(1, &[(0, [3.0, 0.0])]);
        let b = compute_bounds([&a, &c]).unwrap();
        assert_eq!((b.min(), b.max()), (&[1.0, 0.0][..], &[3.0, 1.0][..]));

        let a = archive(1, &[(0, [5.0, 5.0])]);
        let b = compute_bounds([&a]).unwrap();
        assert_eq!((b.min(), b.max()), (&[5.0, 5.0][..], &[6.0, 6.0][..]));

        assert!(compute_bounds([&archive(2, &[])]).is_err());
    }

    #[test]
    fn csv_row_format() {
        let row = MetricsRow {
            iteration: 3,
            env_steps: 102400,
            moqd_score: 1.5,
            moqd_sparsity: 0.0,
            global_hypervolume: 2.25,
            global_sparsity: 0.125,
            max_sum_scores: None,
            coverage: 0.5,
        };
        assert_eq!(row.to_csv(), "3,102400,1.5,0,2.25,0.125,,0.5");
        assert_eq!(CSV_HEADER.split(',').count(), row.to_csv().split(',').count());
    }
}

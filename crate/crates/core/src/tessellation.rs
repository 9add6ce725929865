//! Centroidal Voronoi tessellation of the unit feature hypercube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

pub const DEFAULT_CVT_SAMPLES: usize = 100_000;
pub const DEFAULT_CVT_ITERATIONS: usize = 50;
const CONVERGENCE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Tessellation {
    centroids: Vec<Vec<f64>>,
    dim: usize,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], point: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, point);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

impl Tessellation {
    /// Wraps explicit centroids, checking they are distinct points of `[0,1]^d`.
    pub fn from_centroids(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let first = centroids.first().ok_or(Error::Empty("centroid set"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("centroids must have at least one dimension".into()));
        }
        for c in &centroids {
            check_len(dim, c.len())?;
            if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidArgument("centroid outside the unit hypercube".into()));
            }
        }
        for i in 0..centroids.len() {
            for j in 0..i {
                if centroids[i] == centroids[j] {
                    return Err(Error::InvalidArgument(format!(
                        "centroids {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Tessellation { centroids, dim })
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn num_cells(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn locate(&self, feature: &[f64]) -> Result<usize> {
        check_len(self.dim, feature.len())?;
        Ok(nearest(&self.centroids, feature).0)
    }
}

/// Lloyd's algorithm on `n_samples` uniform points of `[0,1]^d`.
///
/// Stops after `n_iters` rounds or once no centroid moves more than 1e-6.
/// An empty cluster is moved onto the sample lying farthest from its own
/// centroid.
pub fn build_cvt(d: usize, k: usize, n_samples: usize, n_iters: usize, seed: u64) -> Result<Tessellation> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidArgument("CVT needs d >= 1 and k >= 1".into()));
    }
    if k > n_samples {
        return Err(Error::InvalidArgument(format!(
            "cannot place {k} centroids with only {n_samples} samples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut centroids: Vec<Vec<f64>> = samples[..k].to_vec();

    let mut assignment = vec![0usize; n_samples];
    let mut dist = vec![0.0; n_samples];
    for _ in 0..n_iters {
        for (i, s) in samples.iter().enumerate() {
            let (c, dd) = nearest(&centroids, s);
            assignment[i] = c;
            dist[i] = dd;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (s, &c) in samples.iter().zip(&assignment) {
            counts[c] += 1;
            for (acc, v) in sums[c].iter_mut().zip(s) {
                *acc += v;
            }
        }

        let mut moved = 0.0f64;
        let mut taken = vec![false; n_samples];
        for c in 0..k {
            let next = if counts[c] > 0 {
                sums[c].iter().map(|v| v / counts[c] as f64).collect::<Vec<_>>()
            } else {
                let far = (0..n_samples)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("k <= n_samples leaves a free sample");
                taken[far] = true;
                dist[far] = 0.0;
                samples[far].clone()
            };
            moved = moved.max(squared_distance(&next, &centroids[c]).sqrt());
            centroids[c] = next;
        }
        if moved < CONVERGENCE_TOLERANCE {
            break;
        }
    }
    Tessellation::from_centroids(centroids)
}

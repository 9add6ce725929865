//! Pareto dominance, crowding distance, hypervolume and sparsity.
//!
//! All objectives are maximized. Every function here is pure and works on any
//! slice of points that can be viewed as `&[f64]`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

/// Crowding score per front member, aligned with the input order.
pub type CrowdingScores = Vec<f64>;

/// `a` dominates `b`: no worse in every objective and strictly better in one.
///
/// # Panics
///
/// Panics if the vectors have different lengths.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "cannot compare fitness vectors of different lengths");
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strictly = true;
        }
    }
    strictly
}

/// Fallible variant of [`dominates`].
pub fn try_dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates(a, b))
}

/// Indices of the members not dominated by any other member, in input order.
///
/// Points are visited in decreasing order of their objective sum. A dominating
/// point always has a strictly larger sum, so each candidate only needs to be
/// checked against the non-dominated points accepted before it.
pub fn non_dominated_filter<P: AsRef<[f64]>>(set: &[P]) -> Vec<usize> {
    let sums: Vec<f64> = set.iter().map(|p| p.as_ref().iter().sum()).collect();
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&i, &j| sums[j].total_cmp(&sums[i]).then(i.cmp(&j)));

    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let p = set[i].as_ref();
        if !kept.iter().any(|&k| dominates(set[k].as_ref(), p)) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// NSGA-II crowding distance with per-objective range normalization.
///
/// Boundary members are capped at twice the largest finite score on the
/// front. Fronts of one or two members get a uniform score of 1.
pub fn crowding_distances<P: AsRef<[f64]>>(front: &[P]) -> CrowdingScores {
    let n = front.len();
    if n <= 2 {
        return vec![1.0; n];
    }
    let m = front[0].as_ref().len();
    let mut scores = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..m {
        let value = |i: usize| front[i].as_ref()[j];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let range = value(order[n - 1]) - value(order[0]);
        if range <= 0.0 {
            continue;
        }
        scores[order[0]] = f64::INFINITY;
        scores[order[n - 1]] = f64::INFINITY;
        for w in order.windows(3) {
            scores[w[1]] += (value(w[2]) - value(w[0])) / range;
        }
    }

    let max_finite = scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let cap = if max_finite > 0.0 { 2.0 * max_finite } else { 1.0 };
    for s in &mut scores {
        if s.is_infinite() {
            *s = cap;
        }
    }
    scores
}

fn clipped<'a, P: AsRef<[f64]>>(front: &'a [P], reference: &[f64]) -> Result<Vec<&'a [f64]>> {
    let mut kept = Vec::with_capacity(front.len());
    for p in front {
        let p = p.as_ref();
        check_len(reference.len(), p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hypervolume point"));
        }
        if p.iter().zip(reference).all(|(v, r)| v > r) {
            kept.push(p);
        }
    }
    Ok(kept)
}

fn hypervolume_2d(points: &mut [[f64; 2]], reference: [f64; 2]) -> f64 {
    points.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut best_y = reference[1];
    let mut area = 0.0;
    for p in points.iter() {
        if p[1] > best_y {
            area += (p[0] - reference[0]) * (p[1] - best_y);
            best_y = p[1];
        }
    }
    area
}

/// Exact hypervolume dominated by `front` relative to `reference`.
///
/// Points not strictly better than the reference in every objective add
/// nothing. Supports one, two or three objectives; use
/// [`hypervolume_mc`] beyond that.
pub fn hypervolume<P: AsRef<[f64]>>(front: &[P], reference: &[f64]) -> Result<f64> {
    if reference.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("reference point"));
    }
    let points = clipped(front, reference)?;
    match reference.len() {
        0 => Err(Error::InvalidArgument("reference point has no objectives".into())),
        1 => Ok(points
            .iter()
            .map(|p| p[0] - reference[0])
            .fold(0.0, f64::max)),
        2 => {
            let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
            Ok(hypervolume_2d(&mut pts, [reference[0], reference[1]]))
        }
        3 => {
            // Slice along the third objective, highest level first.
            let mut pts: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
            pts.sort_by(|a, b| b[2].total_cmp(&a[2]));
            let mut volume = 0.0;
            let mut slice: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
            let mut i = 0;
            while i < pts.len() {
                let level = pts[i][2];
                while i < pts.len() && pts[i][2] == level {
                    slice.push([pts[i][0], pts[i][1]]);
                    i += 1;
                }
                let next = if i < pts.len() { pts[i][2] } else { reference[2] };
                let area = hypervolume_2d(&mut slice, [reference[0], reference[1]]);
                volume += area * (level - next);
            }
            Ok(volume)
        }
        m => Err(Error::InvalidArgument(format!(
            "exact hypervolume supports at most 3 objectives, got {m}"
        ))),
    }
}

/// Monte-Carlo hypervolume estimate over the box `[reference, bound]`.
pub fn hypervolume_mc<P: AsRef<[f64]>>(
    front: &[P],
    reference: &[f64],
    bound: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    check_len(reference.len(), bound.len())?;
    if reference.iter().zip(bound).any(|(r, b)| b < r) {
        return Err(Error::InvalidArgument("bound point lies below the reference".into()));
    }
    for p in front {
        let p = p.as_ref();
        check_len(bound.len(), p.len())?;
        if p.iter().zip(bound).any(|(v, b)| v > b) {
            return Err(Error::InvalidArgument(
                "bound point must dominate every front member".into(),
            ));
        }
    }
    if front.is_empty() || n_samples == 0 {
        return Ok(0.0);
    }

    let volume: f64 = reference.iter().zip(bound).map(|(r, b)| b - r).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; reference.len()];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for (s, (r, b)) in sample.iter_mut().zip(reference.iter().zip(bound)) {
            *s = r + (b - r) * rng.random::<f64>();
        }
        if front
            .iter()
            .any(|p| p.as_ref().iter().zip(&sample).all(|(v, s)| v >= s))
        {
            hits += 1;
        }
    }
    Ok(volume * hits as f64 / n_samples as f64)
}

/// Mean squared gap between neighbours along each sorted objective.
///
/// Inputs are expected to be normalized already. Fronts with fewer than two
/// members have sparsity 0.
pub fn sparsity<P: AsRef<[f64]>>(front: &[P]) -> f64 {
    let n = front.len();
    if n < 2 {
        return 0.0;
    }
    let m = front[0].as_ref().len();
    let mut column = vec![0.0; n];
    let mut total = 0.0;
    for j in 0..m {
        for (c, p) in column.iter_mut().zip(front) {
            *c = p.as_ref()[j];
        }
        column.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        total += column.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>();
    }
    total / (n - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_filter(set: &[Vec<f64>]) -> Vec<usize> {
        (0..set.len())
            .filter(|&i| !(0..set.len()).any(|j| j != i && dominates(&set[j], &set[i])))
            .collect()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[2.0, 2.0], &[1.0, 1.0]));
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(!dominates(&[3.0, 1.0], &[1.0, 3.0]));
        assert!(!dominates(&[1.0, 3.0], &[3.0, 1.0]));
        assert!(dominates(&[2.0, 1.0], &[1.0, 1.0]));
    }

    #[test]
    #[should_panic]
    fn dominance_length_mismatch_panics() {
        dominates(&[1.0], &[1.0, 2.0]);
    }

    #[test]
    fn try_dominates_rejects_mismatch() {
        assert!(try_dominates(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn filter_examples() {
        let set = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(non_dominated_filter(&set), vec![0, 1, 2]);
        assert_eq!(non_dominated_filter(&[vec![1.0, 1.0], vec![2.0, 2.0]]), vec![1]);
        assert!(non_dominated_filter::<Vec<f64>>(&[]).is_empty());
        // duplicates do not dominate each other
        assert_eq!(non_dominated_filter(&[vec![1.0, 1.0], vec![1.0, 1.0]]), vec![0, 1]);
    }

    #[test]
    fn filter_matches_brute_force_on_grid_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(0..40);
            let m = rng.random_range(2..=3);
            // coarse grid values produce many ties
            let set: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.random_range(0..5) as f64).collect())
                .collect();
            assert_eq!(non_dominated_filter(&set), brute_force_filter(&set));
        }
    }

    #[test]
    fn crowding_examples() {
        let front = vec![vec![0.0, 1.0], vec![0.4, 0.6], vec![1.0, 0.0]];
        assert_eq!(crowding_distances(&front), vec![4.0, 2.0, 4.0]);
        assert_eq!(crowding_distances(&[vec![3.0, 1.0]]), vec![1.0]);
        assert_eq!(crowding_distances(&[vec![3.0, 1.0], vec![1.0, 3.0]]), vec![1.0, 1.0]);
        assert!(crowding_distances::<Vec<f64>>(&[]).is_empty());
    }

    #[test]
    fn crowding_is_permutation_equivariant_and_scale_invariant() {
        let front = vec![
            vec![0.0, 1.0],
            vec![0.1, 0.8],
            vec![0.5, 0.45],
            vec![0.7, 0.2],
            vec![1.0, 0.0],
        ];
        let base = crowding_distances(&front);
        let perm = [3, 0, 4, 1, 2];
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| front[i].clone()).collect();
        let scores = crowding_distances(&permuted);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(scores[k], base[i]);
        }
        let scaled: Vec<Vec<f64>> = front
            .iter()
            .map(|p| vec![3.0 * p[0] + 10.0, 0.5 * p[1] - 4.0])
            .collect();
        for (a, b) in crowding_distances(&scaled).iter().zip(&base) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn crowding_zero_range_objective_is_skipped() {
        // identical first objective: only the second objective contributes
        let front = vec![vec![1.0, 0.0], vec![1.0, 0.5], vec![1.0, 1.0]];
        assert_eq!(crowding_distances(&front), vec![2.0, 1.0, 2.0]);
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[vec![1.0, 1.0]], &[0.0, 0.0]).unwrap(), 1.0);
        let stair = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert!((hypervolume(&stair, &[0.0, 0.0]).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(hypervolume(&[vec![1.0, 1.0, 1.0]], &[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(hypervolume::<Vec<f64>>(&[], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn hypervolume_clips_points_below_reference() {
        let front = vec![vec![-1.0, 5.0], vec![1.0, 1.0], vec![0.0, 4.0]];
        assert_eq!(hypervolume(&front, &[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn hypervolume_three_objectives_inclusion_exclusion() {
        // two boxes: 2*1*1 + 1*2*1 - overlap 1*1*1 = 3, plus a third box on top
        let front = vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 3.0]];
        // union = 3 (z in [0,1]) + 1*1*2 (z in [1,3])
        assert!((hypervolume(&front, &[0.0, 0.0, 0.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hypervolume_rejects_many_objectives() {
        assert!(hypervolume(&[vec![1.0; 4]], &[0.0; 4]).is_err());
        assert!(hypervolume(&[vec![1.0, 1.0]], &[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn hypervolume_mc_examples() {
        let est = hypervolume_mc(&[vec![1.0, 1.0]], &[0.0, 0.0], &[2.0, 2.0], 1_000_000, 1).unwrap();
        assert!((est - 1.0).abs() < 0.01, "{est}");
        let est = hypervolume_mc(&[vec![2.0, 2.0]], &[0.0, 0.0], &[2.0, 2.0], 100_000, 2).unwrap();
        assert!((est - 4.0).abs() < 0.02, "{est}");
        assert_eq!(
            hypervolume_mc::<Vec<f64>>(&[], &[0.0, 0.0], &[2.0, 2.0], 1000, 3).unwrap(),
            0.0
        );
        assert!(hypervolume_mc(&[vec![3.0, 1.0]], &[0.0, 0.0], &[2.0, 2.0], 10, 0).is_err());
    }

    #[test]
    fn sparsity_examples() {
        let front = vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]];
        assert!((sparsity(&front) - 0.5).abs() < 1e-12);
        assert_eq!(sparsity(&[vec![0.3, 0.3], vec![0.3, 0.3]]), 0.0);
        assert!((sparsity(&[vec![0.0, 1.0], vec![1.0, 0.0]]) - 2.0).abs() < 1e-12);
        assert_eq!(sparsity(&[vec![0.2, 0.9]]), 0.0);
        assert_eq!(sparsity::<Vec<f64>>(&[]), 0.0);
    }
}

/// Running per-objective mean and variance (Welford) used to rescale rewards
/// seen by the critics. Archive fitness is never normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardNormalizer {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    enabled: bool,
}

const VARIANCE_EPS: f64 = 1e-8;

impl RewardNormalizer {
    pub fn new(m: usize) -> Self {
        RewardNormalizer {
            count: 0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
            enabled: true,
        }
    }

    /// A normalizer whose `apply` is always the identity.
    pub fn identity(m: usize) -> Self {
        RewardNormalizer {
            enabled: false,
            ..RewardNormalizer::new(m)
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Population variance per objective.
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.mean.len()];
        }
        self.m2.iter().map(|s| s / self.count as f64).collect()
    }

    pub fn update(&mut self, reward: &[f64]) {
        debug_assert_eq!(reward.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), r) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(reward) {
            let delta = r - *mean;
            *mean += delta / n;
            *m2 += delta * (r - *mean);
        }
    }

    pub fn apply(&self, reward: &[f64]) -> Vec<f64> {
        let mut out = reward.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, reward: &mut [f64]) {
        if !self.enabled || self.count < 2 {
            return;
        }
        let n = self.count as f64;
        for ((r, mean), m2) in reward.iter_mut().zip(&self.mean).zip(&self.m2) {
            *r = (*r - mean) / (m2 / n + VARIANCE_EPS).sqrt();
        }
    }
}

//! Run configuration: TOML files, CLI overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::archive::{Eviction, UNBOUNDED};
use crate::envs::Task;
use crate::error::{Error, Result};
use crate::morl::{PgParams, PgPreferenceSampler, Td3Params};
use crate::tessellation::{DEFAULT_CVT_ITERATIONS, DEFAULT_CVT_SAMPLES};
use crate::variation::{GaParams, Selection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Mome,
    MomeP2c,
    NoActor,
    NoCrowding,
    KeepPref,
    OneHot,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Mome,
        Algorithm::MomeP2c,
        Algorithm::NoActor,
        Algorithm::NoCrowding,
        Algorithm::KeepPref,
        Algorithm::OneHot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mome => "mome",
            Algorithm::MomeP2c => "mome-p2c",
            Algorithm::NoActor => "no-actor",
            Algorithm::NoCrowding => "no-crowding",
            Algorithm::KeepPref => "keep-pref",
            Algorithm::OneHot => "one-hot",
        }
    }

    /// Whether the variant trains critics and produces gradient offspring.
    pub fn uses_networks(self) -> bool {
        self != Algorithm::Mome
    }

    pub fn selection(self) -> Selection {
        match self {
            Algorithm::Mome | Algorithm::NoCrowding => Selection::Uniform,
            _ => Selection::Crowding,
        }
    }

    pub fn eviction(self) -> Eviction {
        match self {
            Algorithm::Mome | Algorithm::NoCrowding => Eviction::Uniform,
            _ => Eviction::Crowding,
        }
    }

    pub fn pg_sampler(self) -> PgPreferenceSampler {
        match self {
            Algorithm::KeepPref => PgPreferenceSampler::KeepParent,
            Algorithm::OneHot => PgPreferenceSampler::OneHot,
            _ => PgPreferenceSampler::Uniform,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.name().to_string()
    }
}

/// Offspring counts per iteration after applying the algorithm variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchSizes {
    pub ga: usize,
    pub pg: usize,
    pub actor: usize,
}

impl BatchSizes {
    pub fn total(&self) -> usize {
        self.ga + self.pg + self.actor
    }

    /// Parents drawn per iteration: two per GA child, one per PG child.
    pub fn parents(&self) -> usize {
        2 * self.ga + self.pg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "task_name")]
    pub task: Task,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub iterations: usize,

    pub batch_ga: usize,
    pub batch_pg: usize,
    pub batch_actor: usize,

    pub cells: usize,
    pub front_capacity: usize,
    pub unbounded_fronts: bool,
    pub cvt_samples: usize,
    pub cvt_iterations: usize,

    pub iso_sigma: f64,
    pub line_sigma: f64,

    pub policy_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub replay_buffer_size: usize,
    pub critic_batch_size: usize,
    pub critic_lr: f64,
    pub actor_lr: f64,
    pub policy_lr: f64,
    pub critic_training_steps: usize,
    pub pg_training_steps: usize,
    pub pg_batch_size: usize,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub discount: f64,
    pub tau: f64,
    pub policy_delay: usize,
    pub normalize_rewards: bool,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_point: Option<Vec<f64>>,
    pub snapshot_every: usize,
    pub output_dir: PathBuf,
}

mod task_name {
    use super::Task;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(task: &Task, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(task.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Task, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let td3 = Td3Params::default();
        let pg = PgParams::default();
        let ga = GaParams::default();
        RunConfig {
            task: Task::PointVelocity2,
            algorithm: Algorithm::MomeP2c,
            seed: 0,
            iterations: 4000,
            batch_ga: 128,
            batch_pg: 64,
            batch_actor: 64,
            cells: 128,
            front_capacity: 50,
            unbounded_fronts: false,
            cvt_samples: DEFAULT_CVT_SAMPLES,
            cvt_iterations: DEFAULT_CVT_ITERATIONS,
            iso_sigma: ga.sigma1,
            line_sigma: ga.sigma2,
            policy_hidden: vec![64, 64],
            critic_hidden: vec![256, 256],
            replay_buffer_size: 1_000_000,
            critic_batch_size: td3.batch_size,
            critic_lr: td3.critic_lr,
            actor_lr: td3.actor_lr,
            policy_lr: pg.learning_rate,
            critic_training_steps: td3.critic_steps,
            pg_training_steps: pg.steps,
            pg_batch_size: pg.batch_size,
            policy_noise: td3.policy_noise,
            noise_clip: td3.noise_clip,
            discount: td3.discount,
            tau: td3.tau,
            policy_delay: td3.policy_delay,
            normalize_rewards: true,
            reference_point: None,
            snapshot_every: 50,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Lifts keys of every `[section]` to the top level.
fn flatten(table: toml::Table) -> Result<toml::Table> {
    let mut flat = toml::Table::new();
    for (key, value) in table {
        match value {
            toml::Value::Table(inner) => {
                for (k, v) in flatten(inner)? {
                    if flat.insert(k.clone(), v).is_some() {
                        return Err(Error::Config(format!("key `{k}` is set more than once")));
                    }
                }
            }
            v => {
                if flat.insert(key.clone(), v).is_some() {
                    return Err(Error::Config(format!("key `{key}` is set more than once")));
                }
            }
        }
    }
    Ok(flat)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let config: RunConfig = toml::Value::Table(flatten(table)?)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn batch_sizes(&self) -> BatchSizes {
        match self.algorithm {
            Algorithm::Mome => BatchSizes {
                ga: self.batch_ga + self.batch_pg + self.batch_actor,
                pg: 0,
                actor: 0,
            },
            Algorithm::NoActor => BatchSizes {
                ga: self.batch_ga,
                pg: self.batch_pg + self.batch_actor,
                actor: 0,
            },
            _ => BatchSizes {
                ga: self.batch_ga,
                pg: self.batch_pg,
                actor: self.batch_actor,
            },
        }
    }

    /// The same configuration with batch sizes rewritten to what the variant
    /// actually runs.
    pub fn resolved(&self) -> RunConfig {
        let b = self.batch_sizes();
        RunConfig {
            batch_ga: b.ga,
            batch_pg: b.pg,
            batch_actor: b.actor,
            ..self.clone()
        }
    }

    pub fn archive_capacity(&self) -> usize {
        if self.unbounded_fronts {
            UNBOUNDED
        } else {
            self.front_capacity
        }
    }

    pub fn ga_params(&self) -> GaParams {
        GaParams {
            sigma1: self.iso_sigma,
            sigma2: self.line_sigma,
        }
    }

    pub fn td3_params(&self) -> Td3Params {
        Td3Params {
            discount: self.discount,
            tau: self.tau,
            policy_noise: self.policy_noise,
            noise_clip: self.noise_clip,
            policy_delay: self.policy_delay,
            critic_lr: self.critic_lr,
            actor_lr: self.actor_lr,
            batch_size: self.critic_batch_size,
            critic_steps: self.critic_training_steps,
        }
    }

    pub fn pg_params(&self) -> PgParams {
        PgParams {
            steps: self.pg_training_steps,
            learning_rate: self.policy_lr,
            batch_size: self.pg_batch_size,
        }
    }

    /// Hypervolume reference point: the override if set, else the task's
    /// per-step reward minima summed over an episode.
    pub fn reference(&self) -> Vec<f64> {
        self.reference_point
            .clone()
            .unwrap_or_else(|| self.task.spec().reward_bounds().0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let m = self.task.spec().num_objectives;
        let b = self.batch_sizes();
        if b.total() == 0 {
            return fail("total batch size must be positive".into());
        }
        if b.actor > 0 && b.actor < m {
            return fail(format!("batch_actor must be 0 or at least {m} (one per objective)"));
        }
        if self.algorithm.uses_networks() && b.pg + b.actor == 0 {
            return fail(format!("{} needs batch_pg + batch_actor > 0", self.algorithm));
        }
        if self.cells == 0 {
            return fail("cells must be positive".into());
        }
        if self.cvt_samples < self.cells {
            return fail("cvt_samples must be at least cells".into());
        }
        if !self.unbounded_fronts && self.front_capacity == 0 {
            return fail("front_capacity must be positive".into());
        }
        if self.snapshot_every == 0 {
            return fail("snapshot_every must be positive".into());
        }
        let positive = [
            ("critic_lr", self.critic_lr),
            ("actor_lr", self.actor_lr),
            ("policy_lr", self.policy_lr),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive"));
            }
        }
        let unit = [
            ("discount", self.discount),
            ("tau", self.tau),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} must lie in [0, 1]"));
            }
        }
        for (name, v) in [
            ("iso_sigma", self.iso_sigma),
            ("line_sigma", self.line_sigma),
            ("policy_noise", self.policy_noise),
            ("noise_clip", self.noise_clip),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be non-negative"));
            }
        }
        if self.algorithm.uses_networks() {
            for (name, v) in [
                ("replay_buffer_size", self.replay_buffer_size),
                ("critic_batch_size", self.critic_batch_size),
                ("pg_batch_size", self.pg_batch_size),
                ("policy_delay", self.policy_delay),
            ] {
                if v == 0 {
                    return fail(format!("{name} must be positive"));
                }
            }
        }
        if let Some(r) = &self.reference_point {
            if r.len() != m {
                return fail(format!("reference_point needs {m} values for {}", self.task));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return fail("reference_point must be finite".into());
            }
        }
        Ok(())
    }
}

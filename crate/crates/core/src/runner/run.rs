use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::archive::MoArchive;
use crate::envs::EnvSpec;
use crate::error::Result;
use crate::metrics::{MetricsRow, NormalizationBounds, CSV_HEADER};
use crate::morl::{
    actor_preference_batch, inject_actor, pg_variation, PreferenceCriticPair, PreferenceSource, ReplayBuffer,
    RewardNormalizer, TrainStats,
};
use crate::neural::{Mlp, MlpLayout};
use crate::snapshot;
use crate::tessellation::build_cvt;
use crate::types::{Genotype, Origin, Preference, Solution};
use crate::variation::{iso_line_dd, select};

use super::config::{BatchSizes, RunConfig};
use super::rng::{self, substream};
use rand::Rng;

/// What happened to one offspring during an iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringRecord {
    pub origin: Origin,
    pub pref: Option<Preference>,
    /// Preference stored on the parent of a gradient offspring.
    pub parent_pref: Option<Preference>,
    pub stored: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub offspring: Vec<OffspringRecord>,
    pub training: Option<TrainStats>,
    pub row: MetricsRow,
}

struct Learner {
    buffer: ReplayBuffer,
    normalizer: RewardNormalizer,
    pair: PreferenceCriticPair,
}

/// Owns the archive and learner state of one run and advances it an
/// iteration at a time.
pub struct Runner {
    config: RunConfig,
    batch: BatchSizes,
    spec: EnvSpec,
    policy_layout: MlpLayout,
    archive: MoArchive,
    learner: Option<Learner>,
    reference: Vec<f64>,
    bounds: NormalizationBounds,
    iteration: usize,
    env_steps: u64,
    rows: Vec<MetricsRow>,
}

impl Runner {
    /// Validates the config, builds the tessellation and networks, and
    /// evaluates and inserts one batch of random policies (iteration 0).
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let config = config.resolved();
        let batch = config.batch_sizes();
        let spec = config.task.spec();
        let policy_layout = spec.policy_layout(&config.policy_hidden)?;
        let seed = config.seed;

        let cvt_seed = substream(seed, rng::TESSELLATION, 0, 0).random();
        let tessellation = build_cvt(
            spec.feature_dim,
            config.cells,
            config.cvt_samples,
            config.cvt_iterations,
            cvt_seed,
        )?;
        let archive = MoArchive::new(tessellation, config.archive_capacity())?;

        let learner = if config.algorithm.uses_networks() {
            let m = spec.num_objectives;
            let buffer = ReplayBuffer::new(config.replay_buffer_size, spec.state_dim, spec.action_dim, m)?;
            let normalizer = if config.normalize_rewards {
                RewardNormalizer::new(m)
            } else {
                RewardNormalizer::identity(m)
            };
            let pair = PreferenceCriticPair::new(
                spec.state_dim,
                spec.action_dim,
                m,
                &config.policy_hidden,
                &config.critic_hidden,
                &config.td3_params(),
                &mut substream(seed, rng::NETWORKS, 0, 0),
            )?;
            Some(Learner {
                buffer,
                normalizer,
                pair,
            })
        } else {
            None
        };

        let (lo, hi) = spec.reward_bounds();
        let bounds = NormalizationBounds::new(lo, hi)?;
        let reference = config.reference();
        let mut runner = Runner {
            config,
            batch,
            spec,
            policy_layout,
            archive,
            learner,
            reference,
            bounds,
            iteration: 0,
            env_steps: 0,
            rows: Vec::new(),
        };
        runner.initialize()?;
        Ok(runner)
    }

    fn initialize(&mut self) -> Result<()> {
        let seed = self.config.seed;
        let children = (0..self.batch.total())
            .map(|i| {
                let net = Mlp::random(self.policy_layout.clone(), &mut substream(seed, rng::INIT, 0, i as u64));
                let genotype = Genotype::new(net.into_flat(), &self.policy_layout)?;
                Ok((genotype, Origin::Random, None, None))
            })
            .collect::<Result<Vec<_>>>()?;
        self.evaluate_and_insert(children)?;
        Ok(())
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn batch(&self) -> BatchSizes {
        self.batch
    }

    pub fn archive(&self) -> &MoArchive {
        &self.archive
    }

    /// Number of completed iterations, not counting initialization.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn rows(&self) -> &[MetricsRow] {
        &self.rows
    }

    pub fn replay_buffer(&self) -> Option<&ReplayBuffer> {
        self.learner.as_ref().map(|l| &l.buffer)
    }

    pub fn networks(&self) -> Option<&PreferenceCriticPair> {
        self.learner.as_ref().map(|l| &l.pair)
    }

    pub fn step(&mut self) -> Result<IterationReport> {
        let it = self.iteration + 1;
        let seed = self.config.seed;
        let iter = it as u64;
        let b = self.batch;
        let m = self.spec.num_objectives;

        let parents = select(
            &self.archive,
            b.parents(),
            self.config.algorithm.selection(),
            &mut substream(seed, rng::SELECTION, iter, 0),
        )?;
        let (pg_parents, ga_parents) = parents.split_at(b.pg);

        let mut children = Vec::with_capacity(b.total());
        if let Some(learner) = &self.learner {
            let prefs = self.config.algorithm.pg_sampler().assign(
                pg_parents,
                m,
                &mut substream(seed, rng::PG_PREFERENCE, iter, 0),
            );
            let pg = self.config.pg_params();
            for (i, (parent, pref)) in pg_parents.iter().zip(prefs).enumerate() {
                let child = pg_variation(
                    &parent.genotype,
                    &pref,
                    &learner.pair,
                    &learner.buffer,
                    pg,
                    &mut substream(seed, rng::PG, iter, i as u64),
                )?;
                children.push((child, Origin::Pg, Some(pref), parent.pref.clone()));
            }
        }
        let ga = self.config.ga_params();
        for (j, pair) in ga_parents.chunks_exact(2).enumerate() {
            let child = iso_line_dd(
                &pair[0].genotype,
                &pair[1].genotype,
                ga,
                &mut substream(seed, rng::GA, iter, j as u64),
            )?;
            children.push((child, Origin::Ga, None, None));
        }
        if let Some(learner) = &self.learner {
            if b.actor > 0 {
                let prefs = actor_preference_batch(b.actor, m, &mut substream(seed, rng::ACTOR_SAMPLER, iter, 0))?;
                for pref in prefs {
                    let child = inject_actor(&learner.pair.actor, &pref, self.spec.state_dim)?;
                    children.push((child, Origin::ActorInjection, Some(pref), None));
                }
            }
        }

        let (offspring, training) = self.evaluate_train_insert(children, iter)?;
        self.iteration = it;
        let row = self.rows.last().cloned().expect("a row per iteration");
        Ok(IterationReport {
            iteration: it,
            offspring,
            training,
            row,
        })
    }

    fn evaluate_and_insert(
        &mut self,
        children: Vec<(Genotype, Origin, Option<Preference>, Option<Preference>)>,
    ) -> Result<Vec<OffspringRecord>> {
        self.evaluate_train_insert(children, 0).map(|(records, _)| records)
    }

    fn evaluate_train_insert(
        &mut self,
        children: Vec<(Genotype, Origin, Option<Preference>, Option<Preference>)>,
        iter: u64,
    ) -> Result<(Vec<OffspringRecord>, Option<TrainStats>)> {
        let mut evaluated = Vec::with_capacity(children.len());
        for (genotype, origin, pref, parent_pref) in children {
            let result = self.spec.evaluate(&genotype)?;
            self.env_steps += result.env_steps;
            if let Some(learner) = &mut self.learner {
                for t in &result.transitions {
                    learner.normalizer.update(&t.reward);
                }
                learner.buffer.extend(&result.transitions)?;
            }
            let solution = Solution {
                genotype,
                fitness: result.fitness,
                feature: result.feature,
                origin,
                pref,
            };
            evaluated.push((solution, parent_pref));
        }

        let training = match (&mut self.learner, iter) {
            (Some(learner), 1..) => Some(learner.pair.train(
                &learner.buffer,
                &learner.normalizer,
                &PreferenceSource::Uniform,
                &self.config.td3_params(),
                &mut substream(self.config.seed, rng::TRAINING, iter, 0),
            )?),
            _ => None,
        };

        let eviction = self.config.algorithm.eviction();
        let mut eviction_rng = substream(self.config.seed, rng::EVICTION, iter, 0);
        let mut records = Vec::with_capacity(evaluated.len());
        for (solution, parent_pref) in evaluated {
            let origin = solution.origin;
            let pref = solution.pref.clone();
            let probe = solution.clone();
            let outcome = self.archive.insert_with(solution, eviction, &mut eviction_rng)?;
            records.push(OffspringRecord {
                origin,
                pref,
                parent_pref,
                stored: outcome.is_stored(&probe),
            });
        }

        self.rows.push(MetricsRow::compute(
            &self.archive,
            &self.reference,
            &self.bounds,
            iter as usize,
            self.env_steps,
        )?);
        Ok((records, training))
    }
}

/// Files written by [`run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub metrics_csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub final_snapshot: PathBuf,
    pub resolved_config: PathBuf,
    pub rng_audit: PathBuf,
}

pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    run_with(config, |_| {})
}

/// Runs every configured iteration, calling `progress` after each metrics
/// row (including the initialization row).
pub fn run_with(config: &RunConfig, mut progress: impl FnMut(&MetricsRow)) -> Result<RunArtifacts> {
    config.validate()?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let resolved_config = dir.join("config.toml");
    fs::write(&resolved_config, config.resolved().to_toml_string())?;
    let rng_audit = dir.join("rng.toml");
    fs::write(&rng_audit, rng::audit(config.seed))?;

    let metrics_csv = dir.join("metrics.csv");
    let mut csv = BufWriter::new(File::create(&metrics_csv)?);
    writeln!(csv, "{CSV_HEADER}")?;

    let mut runner = Runner::new(config.clone())?;
    let first = &runner.rows()[0];
    writeln!(csv, "{}", first.to_csv())?;
    progress(first);

    let mut snapshots = Vec::new();
    for _ in 0..config.iterations {
        let report = runner.step()?;
        writeln!(csv, "{}", report.row.to_csv())?;
        csv.flush()?;
        progress(&report.row);
        if report.iteration % config.snapshot_every == 0 {
            let path = snapshot_path(&dir, Some(report.iteration));
            snapshot::save(runner.archive(), &path)?;
            snapshots.push(path);
        }
    }
    csv.flush()?;
    let final_snapshot = snapshot_path(&dir, None);
    snapshot::save(runner.archive(), &final_snapshot)?;
    Ok(RunArtifacts {
        output_dir: dir,
        metrics_csv,
        snapshots,
        final_snapshot,
        resolved_config,
        rng_audit,
    })
}

fn snapshot_path(dir: &Path, iteration: Option<usize>) -> PathBuf {
    match iteration {
        Some(i) => dir.join(format!("archive_{i:06}.snap")),
        None => dir.join("archive_final.snap"),
    }
}

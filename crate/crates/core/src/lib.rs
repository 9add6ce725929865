//! Multi-objective MAP-Elites with preference-conditioned policy-gradient
//! variation, plus the MOME baseline and ablations.

pub mod archive;
pub mod envs;
pub mod error;
pub mod metrics;
pub mod morl;
pub mod neural;
pub mod pareto;
pub mod runner;
pub mod snapshot;
pub mod tessellation;
pub mod types;
pub mod variation;

pub use archive::{Eviction, InsertOutcome, MoArchive, ParetoFront, UNBOUNDED};
pub use envs::{EnvSpec, EvaluationResult, Task};
pub use error::{Error, Result};
pub use metrics::{MetricsRow, NormalizationBounds};
pub use neural::{Activation, Mlp, MlpLayout};
pub use tessellation::Tessellation;
pub use types::{Feature, FitnessVector, Genotype, Origin, Preference, Solution};

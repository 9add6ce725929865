//! Preference-conditioned actor-critic machinery: replay storage, preference
//! samplers, twin-critic training, gradient-based variation and actor
//! injection.

mod buffer;
mod injection;
mod normalizer;
mod pg;
mod preference;
mod td3;

pub use buffer::{ReplayBuffer, Transition, TransitionRef};
pub use injection::inject_actor;
pub use normalizer::RewardNormalizer;
pub use pg::{pg_variation, PgParams};
pub use preference::{actor_preference_batch, sample_preference, PgPreferenceSampler, PreferenceSource};
pub use td3::{surrogate_gradient, PreferenceCriticPair, Td3Params, TrainStats};

//! Experiment harness: data, splitting, configuration, episodes, logs and
//! Shapley attribution.

mod config;
mod data;
mod episode;
mod log;
mod shapley;
mod split;

pub use config::{ExperimentConfig, LearnerSettings, PolicySettings, RewardSettings, KEYS};
pub use data::{generate_synthetic, Dataset, SyntheticSpec};
pub use episode::{load_dataset, run_baseline_episode, run_episode, run_episode_with_curves, EpisodeOutcome, RL_METHOD};
pub use log::{EpisodeLog, EpisodeSummary, RoundRecord, StageTimings, STAGES};
pub use shapley::{majority_rate, shapley_contributions, shapley_from_values, ShapleyReport, MAX_SHAPLEY_MODALITIES};
pub use split::stratified_split;

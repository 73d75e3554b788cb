//! Diversity clustering, unified scoring, candidate sets and baselines.

mod baselines;
mod kmeans;
mod scoring;

pub use baselines::{gradient_embedding, select_baseline, BaselineEntry, Strategy};
pub use kmeans::{budgeted_kmeanspp, diversity_distance, inertia, Centroids, KMeansFit, MAX_LLOYD_ITERS};
pub use scoring::{
    candidate_count, candidate_set, score_pool, score_signals, unified_score, CandidateSet, PoolEntry,
    ScoredItem, ScoredPool, DEFAULT_BETA, DEFAULT_KAPPA,
};

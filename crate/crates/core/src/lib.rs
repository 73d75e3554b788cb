//! Modality-balanced multimodal active learning.
//!
//! The crate wires together adaptive modality weighting ([`amcb`]),
//! evidential fusion of per-modality Dirichlet heads ([`efda`]),
//! diversity-aware candidate scoring ([`selection`]) and a policy-gradient
//! batch selector ([`policy`]) around a small analytic-gradient learner
//! ([`learner`]). The [`harness`] module runs full active-learning episodes
//! on synthetic multimodal data and writes reproducible logs.

pub mod amcb;
pub mod cli;
pub mod efda;
pub mod error;
pub mod harness;
pub mod learner;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod selection;
pub mod simplex;
pub mod types;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use types::{DirichletEvidence, MetricsReport, ModalityWeights, MultimodalInstance, PoolPartition};

//! Adaptive modality contribution balancing.
//!
//! Per-modality validation Top-1 gaps against the fused head are mapped onto
//! the simplex with a temperature softmax, optionally floored so that no
//! modality's weight vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::simplex::{apply_floor, softmax};
use crate::types::ModalityWeights;

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Top-1 gap of each modality head relative to the multimodal head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContributionGaps(pub Vec<f64>);

impl ContributionGaps {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn contribution_gaps(per_modality_top1: &[f64], multimodal_top1: f64) -> Result<ContributionGaps> {
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    if !in_unit(multimodal_top1) || !per_modality_top1.iter().all(|v| in_unit(*v)) {
        return Err(invalid("Top-1 values must lie in [0,1]"));
    }
    if per_modality_top1.is_empty() {
        return Err(invalid("no modality accuracies supplied"));
    }
    Ok(ContributionGaps(
        per_modality_top1.iter().map(|t| t - multimodal_top1).collect(),
    ))
}

/// `softmax(delta / tau)`, floored by `epsilon` when it is positive.
pub fn update_weights(delta: &ContributionGaps, tau: f64, epsilon: f64) -> Result<ModalityWeights> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    if delta.0.is_empty() || delta.0.iter().any(|d| !d.is_finite()) {
        return Err(invalid("gaps must be finite and non-empty"));
    }
    let scaled: Vec<f64> = delta.0.iter().map(|d| d / tau).collect();
    let w = softmax(&scaled);
    if epsilon > 0.0 {
        apply_floor(&w, epsilon)
    } else {
        ModalityWeights::from_masses(&w)
    }
}

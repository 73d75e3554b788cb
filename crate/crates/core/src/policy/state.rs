//! Round state construction and running standardization.

use serde::{Deserialize, Serialize};

use crate::amcb::ContributionGaps;
use crate::learner::TrainDiagnostics;
use crate::selection::{ScoredItem, ScoredPool};
use crate::types::{MetricsReport, ModalityWeights};

/// Standard-deviation floor used when z-scoring state coordinates.
pub const STD_FLOOR: f64 = 1e-6;

/// Length of the state vector for `m` modalities:
/// validation stats (3), gaps (m), pool uncertainty and diversity (2), training diagnostics (2).
pub fn state_len(m: usize) -> usize {
    7 + m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    /// Squashed, unstandardized coordinates.
    pub raw: Vec<f64>,
    /// Coordinates fed to the policy.
    pub values: Vec<f64>,
}

impl RoundState {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Running z-score over every state observed so far in the episode,
/// including the one being standardized. The first state passes through.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateHistory {
    rows: Vec<Vec<f64>>,
}

impl StateHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn standardize(&mut self, raw: &[f64]) -> Vec<f64> {
        self.rows.push(raw.to_vec());
        if self.rows.len() == 1 {
            return raw.to_vec();
        }
        let n = self.rows.len() as f64;
        raw.iter()
            .enumerate()
            .map(|(k, &x)| {
                let mean = self.rows.iter().map(|r| r[k]).sum::<f64>() / n;
                let var = self.rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
                (x - mean) / var.sqrt().max(STD_FLOOR)
            })
            .collect()
    }
}

/// Squashed raw state: `[top1, nll/(1+nll), ece, gaps.., u_bar, d_bar, loss_slope, grad_norm]`.
pub fn raw_state(
    val: &MetricsReport,
    delta: &ContributionGaps,
    u_bar: f64,
    d_bar: f64,
    diagnostics: &TrainDiagnostics,
) -> Vec<f64> {
    let mut raw = Vec::with_capacity(state_len(delta.as_slice().len()));
    raw.push(val.top1);
    raw.push(val.nll / (1.0 + val.nll));
    raw.push(val.ece);
    raw.extend_from_slice(delta.as_slice());
    raw.push(u_bar);
    raw.push(d_bar);
    raw.push(diagnostics.loss_slope);
    raw.push(diagnostics.grad_norm);
    raw
}

/// Builds the state for this round and records it in `history`.
pub fn build_state(
    val: &MetricsReport,
    delta: &ContributionGaps,
    w: &ModalityWeights,
    scored: &ScoredPool,
    diagnostics: &TrainDiagnostics,
    history: &mut StateHistory,
) -> RoundState {
    let (u_bar, d_bar) = scored.summaries(w);
    let raw = raw_state(val, delta, u_bar, d_bar, diagnostics);
    let values = history.standardize(&raw);
    RoundState { raw, values }
}

/// Per-candidate policy input `[u~_1..u~_M, d~, q, sum_m w_m u~_m]`.
pub fn candidate_features(item: &ScoredItem, w: &ModalityWeights) -> Vec<f64> {
    let mut f = Vec::with_capacity(item.u_norm.len() + 3);
    f.extend_from_slice(&item.u_norm);
    f.push(item.d_norm);
    f.push(item.q);
    f.push(item.u_norm.iter().zip(w.as_slice()).map(|(u, w)| u * w).sum());
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag() -> TrainDiagnostics {
        TrainDiagnostics {
            loss_slope: -0.1,
            grad_norm: 0.5,
            final_loss: 1.0,
        }
    }

    fn pool() -> ScoredPool {
        ScoredPool {
            items: vec![ScoredItem {
                id: 1,
                u: vec![0.1, 0.2],
                d: 1.0,
                u_norm: vec![0.2, 0.4],
                d_norm: 0.3,
                q: 0.6,
            }],
            beta: 1.0,
        }
    }

    #[test]
    fn first_round_passthrough_and_length() {
        let val = MetricsReport { top1: 0.5, nll: 1.0, ece: 0.1 };
        let delta = ContributionGaps(vec![0.1, -0.1]);
        let w = ModalityWeights::uniform(2);
        let mut h = StateHistory::new();
        let s = build_state(&val, &delta, &w, &pool(), &diag(), &mut h);
        assert_eq!(s.len(), 9);
        assert_eq!(s.values, s.raw);
        assert_eq!(s.raw[1], 0.5);
    }

    #[test]
    fn constant_history_standardizes_to_zero() {
        let mut h = StateHistory::new();
        for _ in 0..4 {
            h.standardize(&[2.0, 3.0]);
        }
        let z = h.standardize(&[2.0, 3.0]);
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn standardized_values_are_bounded() {
        let mut h = StateHistory::new();
        h.standardize(&[0.0]);
        let z = h.standardize(&[1e6]);
        assert!((z[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn candidate_feature_example() {
        let w = ModalityWeights::uniform(2);
        let f = candidate_features(&pool().items[0], &w);
        let want = [0.2, 0.4, 0.3, 0.6, 0.3];
        assert!(f.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));

        let zero = ScoredItem {
            id: 2,
            u: vec![0.0, 0.0],
            d: 0.0,
            u_norm: vec![0.0, 0.0],
            d_norm: 0.0,
            q: 0.0,
        };
        assert_eq!(candidate_features(&zero, &w), vec![0.0; 5]);
    }
}

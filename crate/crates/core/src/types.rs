//! Shared domain types.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Tolerance used when validating that weights sum to one.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point on the probability simplex over modalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModalityWeights(Vec<f64>);

impl ModalityWeights {
    /// Validates that `w` is a simplex point (entries in [0,1], sum 1 within 1e-12).
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(invalid("modality weights must be non-empty"));
        }
        if let Some(bad) = w.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(invalid(format!("weight entry {bad} outside [0,1]")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(invalid(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(w))
    }

    /// Divides nonnegative finite masses by their total.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        if masses.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(invalid("masses sum to zero"));
        }
        Ok(Self(masses.iter().map(|m| m / total).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// The vertex `e_k`.
    pub fn vertex(m: usize, k: usize) -> Self {
        let mut w = vec![0.0; m];
        w[k] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, m: usize) -> f64 {
        self.0[m]
    }

    /// Index of the largest weight, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    /// Weights restricted to `mask` and renormalized; zero outside the mask.
    /// Falls back to uniform over the mask when the restricted mass is zero.
    pub fn restricted(&self, mask: &[usize]) -> Result<Self> {
        if mask.is_empty() {
            return Err(invalid("empty modality mask"));
        }
        let mut out = vec![0.0; self.0.len()];
        for &m in mask {
            if m >= self.0.len() {
                return Err(invalid(format!("mask modality {m} out of range")));
            }
            out[m] = self.0[m];
        }
        let total: f64 = mask.iter().map(|&m| out[m]).sum();
        if total > 0.0 {
            for &m in mask {
                out[m] /= total;
            }
        } else {
            for &m in mask {
                out[m] = 1.0 / mask.len() as f64;
            }
        }
        Ok(Self(out))
    }
}

/// Dirichlet concentration vector for one modality or the fused estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirichletEvidence(Vec<f64>);

impl DirichletEvidence {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(invalid("empty concentration vector"));
        }
        if let Some(bad) = alpha.iter().find(|a| !a.is_finite() || **a <= 0.0) {
            return Err(invalid(format!("concentration {bad} is not strictly positive")));
        }
        Ok(Self(alpha))
    }

    pub(crate) fn new_unchecked(alpha: Vec<f64>) -> Self {
        Self(alpha)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    /// Total concentration `alpha_0`.
    pub fn strength(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Expected class probabilities `alpha / alpha_0`.
    pub fn expected_probs(&self) -> Vec<f64> {
        let s = self.strength();
        self.0.iter().map(|a| a / s).collect()
    }
}

/// One sample with `M` per-modality feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodalInstance {
    pub id: usize,
    pub label: Option<usize>,
    pub features: Vec<Vec<f64>>,
}

impl MultimodalInstance {
    pub fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.features.len() != dims.len() {
            return Err(invalid(format!(
                "instance {} has {} modalities, expected {}",
                self.id,
                self.features.len(),
                dims.len()
            )));
        }
        for (m, (f, &d)) in self.features.iter().zip(dims).enumerate() {
            if f.len() != d {
                return Err(invalid(format!(
                    "instance {} modality {m} has dimension {}, expected {d}",
                    self.id,
                    f.len()
                )));
            }
        }
        Ok(())
    }
}

/// Labeled / unlabeled / validation split of a dataset by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolPartition {
    pub labeled: BTreeSet<usize>,
    pub unlabeled: BTreeSet<usize>,
    pub validation: BTreeSet<usize>,
}

impl PoolPartition {
    pub fn total(&self) -> usize {
        self.labeled.len() + self.unlabeled.len() + self.validation.len()
    }

    pub fn is_disjoint(&self) -> bool {
        self.labeled.is_disjoint(&self.unlabeled)
            && self.labeled.is_disjoint(&self.validation)
            && self.unlabeled.is_disjoint(&self.validation)
    }

    /// Moves `ids` from the unlabeled pool into the labeled set.
    pub fn acquire(&mut self, ids: &[usize]) -> Result<()> {
        for id in ids {
            if !self.unlabeled.contains(id) {
                return Err(invalid(format!("id {id} is not in the unlabeled pool")));
            }
        }
        for id in ids {
            self.unlabeled.remove(id);
            self.labeled.insert(*id);
        }
        Ok(())
    }
}

/// Top-1 accuracy, negative log-likelihood (nats) and expected calibration error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub top1: f64,
    pub nll: f64,
    pub ece: f64,
}

/// Index of the maximum, lowest index on ties. NaN entries are never chosen.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

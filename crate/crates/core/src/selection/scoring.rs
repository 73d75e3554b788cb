//! Unified informativeness + diversity score and Top-K candidate sets.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::kmeans::{diversity_distance, Centroids};
use crate::efda::per_modality_uncertainty;
use crate::error::{invalid, precondition, Result};
use crate::simplex::minmax_normalize;
use crate::types::{DirichletEvidence, ModalityWeights};

pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_KAPPA: f64 = 5.0;

/// Model outputs for one unlabeled instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub id: usize,
    pub alphas: Vec<DirichletEvidence>,
    pub fused: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub id: usize,
    /// Raw per-modality uncertainty `u_m`.
    pub u: Vec<f64>,
    /// Raw nearest-centroid distance.
    pub d: f64,
    pub u_norm: Vec<f64>,
    pub d_norm: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPool {
    pub items: Vec<ScoredItem>,
    pub beta: f64,
}

impl ScoredPool {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&ScoredItem> {
        self.items.iter().find(|it| it.id == id)
    }

    /// Pool means of the normalized weighted uncertainty and the normalized distance.
    pub fn summaries(&self, w: &ModalityWeights) -> (f64, f64) {
        let n = self.items.len().max(1) as f64;
        let u = self.items.iter().map(|it| weighted(&it.u_norm, w)).sum::<f64>() / n;
        let d = self.items.iter().map(|it| it.d_norm).sum::<f64>() / n;
        (u, d)
    }
}

fn weighted(u: &[f64], w: &ModalityWeights) -> f64 {
    u.iter().zip(w.as_slice()).map(|(a, b)| a * b).sum()
}

/// `q = sum_m w_m u~_m + beta d~`.
pub fn unified_score(u_norm: &[f64], d_norm: f64, w: &ModalityWeights, beta: f64) -> f64 {
    weighted(u_norm, w) + beta * d_norm
}

/// Scores from precomputed raw signals: `u[i]` holds the M uncertainties of
/// item `i`, `d[i]` its distance. Both signals are min-max normalized over the pool.
pub fn score_signals(
    ids: &[usize],
    u: Vec<Vec<f64>>,
    d: Vec<f64>,
    w: &ModalityWeights,
    beta: f64,
) -> Result<ScoredPool> {
    if ids.is_empty() {
        return Err(precondition("cannot score an empty pool"));
    }
    if u.len() != ids.len() || d.len() != ids.len() {
        return Err(invalid("signal lengths differ from id count"));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid("beta must be finite and nonnegative"));
    }
    let m = w.len();
    if u.iter().any(|row| row.len() != m) {
        return Err(invalid("uncertainty rows must have one entry per modality"));
    }
    let mut u_norm_cols = Vec::with_capacity(m);
    for k in 0..m {
        let col: Vec<f64> = u.iter().map(|row| row[k]).collect();
        u_norm_cols.push(minmax_normalize(&col)?);
    }
    let d_norm = minmax_normalize(&d)?;
    let items = ids
        .iter()
        .zip(u)
        .zip(d)
        .enumerate()
        .map(|(i, ((&id, u), d))| {
            let u_norm: Vec<f64> = u_norm_cols.iter().map(|col| col[i]).collect();
            let q = unified_score(&u_norm, d_norm[i], w, beta);
            ScoredItem {
                id,
                u,
                d,
                u_norm,
                d_norm: d_norm[i],
                q,
            }
        })
        .collect();
    Ok(ScoredPool { items, beta })
}

/// Uncertainty from each modality's evidence, distance from the fused
/// feature to the nearest centroid, then [`score_signals`].
pub fn score_pool(
    pool: &[PoolEntry],
    w: &ModalityWeights,
    centroids: &Centroids,
    beta: f64,
) -> Result<ScoredPool> {
    if pool.is_empty() {
        return Err(precondition("cannot score an empty pool"));
    }
    let mut ids = Vec::with_capacity(pool.len());
    let mut u = Vec::with_capacity(pool.len());
    let mut d = Vec::with_capacity(pool.len());
    for entry in pool {
        if entry.alphas.len() != w.len() {
            return Err(invalid(format!("entry {} has the wrong modality count", entry.id)));
        }
        ids.push(entry.id);
        u.push(per_modality_uncertainty(&entry.alphas)?);
        d.push(diversity_distance(&entry.fused, centroids)?);
    }
    score_signals(&ids, u, d, w, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    /// Ids sorted by descending score, lower id first on ties.
    pub ids: Vec<usize>,
    pub scores: Vec<f64>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Candidate set size `min(ceil(kappa * b), pool)`.
pub fn candidate_count(b: usize, kappa: f64, pool: usize) -> usize {
    ((kappa * b as f64).ceil() as usize).min(pool)
}

fn by_score(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Top-K of the pool by `q`, ties broken toward lower ids.
pub fn candidate_set(scored: &ScoredPool, b: usize, kappa: f64) -> Result<CandidateSet> {
    if scored.is_empty() {
        return Err(precondition("candidate set requested from an empty pool"));
    }
    if b == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(invalid("kappa must be at least 1"));
    }
    let k = candidate_count(b, kappa, scored.len());
    let mut keyed: Vec<(f64, usize)> = scored.items.iter().map(|it| (it.q, it.id)).collect();
    if k < keyed.len() {
        keyed.select_nth_unstable_by(k - 1, by_score);
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(by_score);
    Ok(CandidateSet {
        ids: keyed.iter().map(|p| p.1).collect(),
        scores: keyed.iter().map(|p| p.0).collect(),
    })
}

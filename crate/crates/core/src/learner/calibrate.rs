//! Per-modality temperature scaling on the validation split.

use serde::{Deserialize, Serialize};

use super::{evidence_from_logits, ModelParams};
use crate::error::{invalid, precondition, Result};
use crate::types::MultimodalInstance;

pub const GRID_POINTS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemperatureSet(Vec<f64>);

impl TemperatureSet {
    pub fn new(temps: Vec<f64>) -> Result<Self> {
        if temps.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("temperatures must be positive"));
        }
        Ok(Self(temps))
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![1.0; m])
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
}

/// 25 log-spaced temperatures from 0.25 to 4; the middle point is exactly 1.
pub fn temperature_grid() -> Vec<f64> {
    let half = (GRID_POINTS / 2) as i32;
    (0..GRID_POINTS as i32)
        .map(|i| 4f64.powf(f64::from(i - half) / f64::from(half)))
        .collect()
}

fn expected_prob_nll(logits: &[Vec<f64>], labels: &[usize], t: f64) -> f64 {
    let total: f64 = logits
        .iter()
        .zip(labels)
        .map(|(z, &y)| {
            let alpha = evidence_from_logits(z, t);
            let a = alpha.as_slice();
            alpha.strength().ln() - a[y].ln()
        })
        .sum();
    total / logits.len() as f64
}

/// Grid temperature minimizing the NLL of `alpha / alpha_0`; ties go to the
/// temperature nearest 1 in log distance.
pub fn fit_temperature_from_logits(logits: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if logits.is_empty() || logits.len() != labels.len() {
        return Err(precondition("temperature fitting needs matching non-empty logits and labels"));
    }
    let mut best_t: f64 = 1.0;
    let mut best_nll = expected_prob_nll(logits, labels, 1.0);
    for t in temperature_grid() {
        let nll = expected_prob_nll(logits, labels, t);
        let tol = 1e-12 * best_nll.abs().max(1.0);
        let better = nll < best_nll - tol;
        let tied_closer = (nll - best_nll).abs() <= tol && t.ln().abs() < best_t.ln().abs();
        if better || tied_closer {
            best_t = t;
            best_nll = nll;
        }
    }
    Ok(best_t)
}

pub fn fit_temperatures(params: &ModelParams, validation: &[&MultimodalInstance]) -> Result<TemperatureSet> {
    if validation.is_empty() {
        return Err(precondition("validation split is empty"));
    }
    let dims = params.dims();
    let mut labels = Vec::with_capacity(validation.len());
    let mut per_modality: Vec<Vec<Vec<f64>>> = vec![Vec::new(); params.modalities()];
    for x in validation {
        x.check_dims(&dims)?;
        labels.push(
            x.label
                .ok_or_else(|| precondition(format!("validation instance {} has no label", x.id)))?,
        );
        for (m, rows) in per_modality.iter_mut().enumerate() {
            let f = params.encoders[m].forward(&x.features[m]);
            rows.push(params.heads[m].forward(&f));
        }
    }
    let temps = per_modality
        .iter()
        .map(|rows| fit_temperature_from_logits(rows, &labels))
        .collect::<Result<Vec<_>>>()?;
    TemperatureSet::new(temps)
}

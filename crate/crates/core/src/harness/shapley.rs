//! Exact Shapley attribution of validation Top-1 to modalities.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};
use crate::learner::{evaluate, ModelParams, TemperatureSet};
use crate::types::{ModalityWeights, MultimodalInstance};

/// Largest modality count accepted (2^M coalition evaluations).
pub const MAX_SHAPLEY_MODALITIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyReport {
    pub phi: Vec<f64>,
    /// `v(S)` indexed by the bitmask of `S`.
    pub coalition_values: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shapley values of an `m`-player game given `v` on every bitmask.
pub fn shapley_from_values(m: usize, values: &[f64]) -> Result<Vec<f64>> {
    if m == 0 || m > MAX_SHAPLEY_MODALITIES {
        return Err(invalid(format!("Shapley enumeration supports 1..={MAX_SHAPLEY_MODALITIES} players")));
    }
    if values.len() != 1 << m {
        return Err(invalid("need one value per coalition"));
    }
    let total = factorial(m);
    let mut phi = vec![0.0; m];
    for (player, slot) in phi.iter_mut().enumerate() {
        let bit = 1usize << player;
        for s in 0..(1usize << m) {
            if s & bit != 0 {
                continue;
            }
            let size = s.count_ones() as usize;
            let weight = factorial(size) * factorial(m - 1 - size) / total;
            *slot += weight * (values[s | bit] - values[s]);
        }
    }
    Ok(phi)
}

/// Fraction of the most frequent label (the best label-only predictor).
pub fn majority_rate(labels: &[usize]) -> f64 {
    let Some(&max) = labels.iter().max() else {
        return 0.0;
    };
    let mut counts = vec![0usize; max + 1];
    for &y in labels {
        counts[y] += 1;
    }
    *counts.iter().max().unwrap_or(&0) as f64 / labels.len() as f64
}

/// `v(S)` = multimodal-head validation Top-1 with fusion restricted to `S`;
/// `v({})` = majority-class rate.
pub fn shapley_contributions(
    params: &ModelParams,
    validation: &[&MultimodalInstance],
    temps: &TemperatureSet,
    w: &ModalityWeights,
) -> Result<ShapleyReport> {
    let m = params.modalities();
    if m > MAX_SHAPLEY_MODALITIES {
        return Err(invalid(format!("{m} modalities exceed the Shapley limit")));
    }
    if validation.is_empty() {
        return Err(precondition("validation split is empty"));
    }
    let labels: Vec<usize> = validation
        .iter()
        .map(|x| x.label.ok_or_else(|| precondition("unlabeled validation instance")))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; 1 << m];
    values[0] = majority_rate(&labels);
    for (s, slot) in values.iter_mut().enumerate().skip(1) {
        let mask: Vec<usize> = (0..m).filter(|k| s & (1 << k) != 0).collect();
        *slot = evaluate(params, validation, temps, w, Some(&mask))?.multimodal.top1;
    }
    let phi = shapley_from_values(m, &values)?;
    Ok(ShapleyReport {
        phi,
        coalition_values: values,
    })
}

//! Sequential softmax sampling without replacement (Plackett-Luce).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::PolicyParams;
use crate::error::{invalid, precondition, Result};
use crate::simplex::{log_sum_exp, softmax};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchAction {
    /// Selected ids in draw order.
    pub ids: Vec<usize>,
    /// Positions of the selected ids within the candidate list.
    pub positions: Vec<usize>,
    pub step_log_probs: Vec<f64>,
    pub log_prob: f64,
}

/// Draws `b` distinct candidates; each step is a softmax over those not yet taken.
pub fn sample_batch<R: Rng>(logits: &[f64], ids: &[usize], b: usize, rng: &mut R) -> Result<BatchAction> {
    if logits.len() != ids.len() {
        return Err(invalid("logits and ids differ in length"));
    }
    if b > logits.len() {
        return Err(precondition(format!("batch {b} exceeds {} candidates", logits.len())));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(invalid("non-finite logit"));
    }
    let mut remaining: Vec<usize> = (0..logits.len()).collect();
    let mut positions = Vec::with_capacity(b);
    let mut step_log_probs = Vec::with_capacity(b);
    for _ in 0..b {
        let z: Vec<f64> = remaining.iter().map(|&i| logits[i]).collect();
        let probs = softmax(&z);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut slot = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                slot = k;
                break;
            }
        }
        step_log_probs.push(z[slot] - log_sum_exp(&z));
        positions.push(remaining.remove(slot));
    }
    Ok(BatchAction {
        ids: positions.iter().map(|&p| ids[p]).collect(),
        log_prob: step_log_probs.iter().sum(),
        positions,
        step_log_probs,
    })
}

/// Log-probability of drawing `positions` in order.
pub fn sequence_log_prob(logits: &[f64], positions: &[usize]) -> Result<f64> {
    let mut taken = vec![false; logits.len()];
    let mut total = 0.0;
    for &p in positions {
        if p >= logits.len() || taken[p] {
            return Err(invalid("positions must be distinct and in range"));
        }
        let z: Vec<f64> = (0..logits.len()).filter(|&i| !taken[i]).map(|i| logits[i]).collect();
        total += logits[p] - log_sum_exp(&z);
        taken[p] = true;
    }
    Ok(total)
}

/// `d log pi / d z_i`: for each step, the indicator of the pick minus the
/// step's softmax mass on each remaining candidate.
pub fn logit_coefficients(logits: &[f64], positions: &[usize]) -> Vec<f64> {
    let mut coef = vec![0.0; logits.len()];
    let mut remaining: Vec<usize> = (0..logits.len()).collect();
    for &p in positions {
        let z: Vec<f64> = remaining.iter().map(|&i| logits[i]).collect();
        for (&i, pr) in remaining.iter().zip(softmax(&z)) {
            coef[i] -= pr;
        }
        coef[p] += 1.0;
        remaining.retain(|&i| i != p);
    }
    coef
}

/// Gradient of `log pi_theta(action | state)` with respect to the flat policy parameters.
pub fn log_prob_gradient(
    theta: &PolicyParams,
    state: &[f64],
    candidates: &[Vec<f64>],
    positions: &[usize],
) -> Result<Vec<f64>> {
    let logits = theta.logits(state, candidates)?;
    let coef = logit_coefficients(&logits, positions);
    theta.weighted_logit_grad(state, candidates, &coef)
}

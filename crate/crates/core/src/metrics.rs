//! Classification metrics on probability rows.

use crate::error::{invalid, precondition, Result};
use crate::types::{argmax, MetricsReport};

/// Number of equal-width confidence bins used for ECE.
pub const ECE_BINS: usize = 15;

/// Probabilities below this floor are clamped before taking logs.
const PROB_FLOOR: f64 = 1e-12;

/// Top-1, mean NLL and binned ECE over `prob_rows`.
///
/// Rows must sum to one within 1e-9. Argmax ties resolve to the lowest class
/// index; ECE bins are equal-width over the max-probability confidence.
pub fn compute_metrics(
    prob_rows: &[Vec<f64>],
    labels: &[usize],
    bins: usize,
) -> Result<MetricsReport> {
    if prob_rows.is_empty() {
        return Err(precondition("metrics need at least one row"));
    }
    if prob_rows.len() != labels.len() {
        return Err(invalid("rows and labels differ in length"));
    }
    if bins == 0 {
        return Err(invalid("ECE needs at least one bin"));
    }
    let n = prob_rows.len() as f64;
    let mut correct = 0usize;
    let mut nll = 0.0;
    let mut bin_count = vec![0usize; bins];
    let mut bin_correct = vec![0usize; bins];
    let mut bin_conf = vec![0.0f64; bins];

    for (row, &label) in prob_rows.iter().zip(labels) {
        if label >= row.len() {
            return Err(invalid(format!("label {label} out of range for {} classes", row.len())));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid(format!("probability row sums to {sum}")));
        }
        let pred = argmax(row);
        let hit = pred == label;
        if hit {
            correct += 1;
        }
        nll -= row[label].max(PROB_FLOOR).ln();
        let conf = row[pred];
        let b = ((conf * bins as f64).floor() as usize).min(bins - 1);
        bin_count[b] += 1;
        bin_conf[b] += conf;
        if hit {
            bin_correct[b] += 1;
        }
    }

    let ece = (0..bins)
        .filter(|&b| bin_count[b] > 0)
        .map(|b| {
            let cnt = bin_count[b] as f64;
            (cnt / n) * (bin_correct[b] as f64 / cnt - bin_conf[b] / cnt).abs()
        })
        .sum::<f64>();

    Ok(MetricsReport {
        top1: correct as f64 / n,
        nll: (nll / n).max(0.0),
        ece: ece.clamp(0.0, 1.0),
    })
}

/// Shannon entropy in nats; zero-probability terms contribute nothing.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

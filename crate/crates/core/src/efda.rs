//! Evidence-level fusion of per-modality Dirichlet concentrations and the
//! predictive-variance difficulty score derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::types::{DirichletEvidence, ModalityWeights};

/// Per-class Dirichlet predictive variance and its class mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedUncertainty {
    pub per_class_var: Vec<f64>,
    pub difficulty: f64,
    pub alpha0: f64,
}

/// `alpha_f = 1 + sum_m w_m (alpha_m - 1)`.
///
/// Every input concentration must be at least 1 (the zero-evidence prior).
pub fn fuse_evidence(alphas: &[DirichletEvidence], w: &ModalityWeights) -> Result<DirichletEvidence> {
    if alphas.is_empty() || alphas.len() != w.len() {
        return Err(invalid(format!(
            "{} evidence vectors for {} weights",
            alphas.len(),
            w.len()
        )));
    }
    let classes = alphas[0].classes();
    if alphas.iter().any(|a| a.classes() != classes) {
        return Err(invalid("evidence vectors disagree on class count"));
    }
    if alphas.iter().flat_map(|a| a.as_slice()).any(|v| *v < 1.0) {
        return Err(invalid("concentration below the unit prior"));
    }
    let mut fused = vec![1.0; classes];
    for (alpha, &wm) in alphas.iter().zip(w.as_slice()) {
        if wm == 0.0 {
            continue;
        }
        for (f, a) in fused.iter_mut().zip(alpha.as_slice()) {
            *f += wm * (a - 1.0);
        }
    }
    Ok(DirichletEvidence::new_unchecked(fused))
}

/// `Var[p_c] = a_c (a_0 - a_c) / (a_0^2 (a_0 + 1))`, averaged over classes.
pub fn dirichlet_uncertainty(alpha: &DirichletEvidence) -> Result<FusedUncertainty> {
    let a = alpha.as_slice();
    if a.is_empty() || a.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(invalid("concentrations must be strictly positive"));
    }
    let a0: f64 = a.iter().sum();
    let denom = a0 * a0 * (a0 + 1.0);
    let per_class_var: Vec<f64> = a.iter().map(|&ac| ac * (a0 - ac) / denom).collect();
    let difficulty = per_class_var.iter().sum::<f64>() / a.len() as f64;
    Ok(FusedUncertainty {
        per_class_var,
        difficulty,
        alpha0: a0,
    })
}

/// Difficulty of each modality's own Dirichlet estimate.
pub fn per_modality_uncertainty(alphas: &[DirichletEvidence]) -> Result<Vec<f64>> {
    alphas
        .iter()
        .map(|a| dirichlet_uncertainty(a).map(|u| u.difficulty))
        .collect()
}

//! Desk-scale multimodal classifier.
//!
//! One affine encoder per modality maps `x^(m)` to a shared hidden space.
//! Each modality has a linear evidential head (Dirichlet evidence via
//! softplus), and a multimodal softmax head reads the weight-fused feature
//! `f = sum_m w_m f_m`.

mod calibrate;
mod dense;
pub mod special;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use calibrate::{fit_temperature_from_logits, fit_temperatures, temperature_grid, TemperatureSet};
pub use dense::Dense;
pub use train::{loss_and_grad, total_loss, train, TrainDiagnostics};

use crate::error::{invalid, precondition, Error, Result};
use crate::metrics::{compute_metrics, ECE_BINS};
use crate::rng::RngStream;
use crate::simplex::softmax;
use crate::types::{DirichletEvidence, MetricsReport, ModalityWeights, MultimodalInstance};

use special::softplus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub dims: Vec<usize>,
    pub hidden_dim: usize,
    pub classes: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub kl_coeff: f64,
    /// Continue from the previous round's parameters instead of re-initializing.
    pub warm_start: bool,
}

impl LearnerConfig {
    pub fn modalities(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(invalid("need at least one modality with nonzero dimension"));
        }
        if self.classes < 2 {
            return Err(invalid("need at least two classes"));
        }
        if self.hidden_dim == 0 || self.epochs == 0 {
            return Err(invalid("hidden_dim and epochs must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(invalid("learning rate must be finite and nonnegative"));
        }
        if self.weight_decay < 0.0 || self.kl_coeff < 0.0 {
            return Err(invalid("weight decay and KL coefficient must be nonnegative"));
        }
        Ok(())
    }
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            dims: vec![16, 16],
            hidden_dim: 32,
            classes: 6,
            learning_rate: 0.1,
            epochs: 30,
            weight_decay: 1e-4,
            kl_coeff: 0.01,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub encoders: Vec<Dense>,
    pub heads: Vec<Dense>,
    pub fusion_head: Dense,
}

/// Format tag written at the top of every checkpoint.
pub const CHECKPOINT_VERSION: &str = "mbal-params-v1";

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: String,
    params: ModelParams,
}

impl ModelParams {
    pub fn zeros(config: &LearnerConfig) -> Self {
        Self {
            encoders: config.dims.iter().map(|&d| Dense::zeros(d, config.hidden_dim)).collect(),
            heads: config
                .dims
                .iter()
                .map(|_| Dense::zeros(config.hidden_dim, config.classes))
                .collect(),
            fusion_head: Dense::zeros(config.hidden_dim, config.classes),
        }
    }

    pub fn modalities(&self) -> usize {
        self.encoders.len()
    }

    pub fn classes(&self) -> usize {
        self.fusion_head.out
    }

    pub fn hidden_dim(&self) -> usize {
        self.fusion_head.inp
    }

    pub fn dims(&self) -> Vec<usize> {
        self.encoders.iter().map(|e| e.inp).collect()
    }

    /// Blocks in a fixed order: encoders, modality heads, fusion head.
    pub fn blocks(&self) -> impl Iterator<Item = &Dense> {
        self.encoders.iter().chain(&self.heads).chain(std::iter::once(&self.fusion_head))
    }

    pub fn blocks_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.encoders
            .iter_mut()
            .chain(self.heads.iter_mut())
            .chain(std::iter::once(&mut self.fusion_head))
    }

    pub fn num_params(&self) -> usize {
        self.blocks().map(Dense::num_params).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().flat_map(|b| b.values().copied()).collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        for (slot, v) in self.blocks_mut().flat_map(|b| b.values_mut()).zip(flat) {
            *slot = *v;
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.blocks().flat_map(|b| b.values()).map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().flat_map(|b| b.values()).all(|v| v.is_finite())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let ckpt = Checkpoint {
            version: CHECKPOINT_VERSION.to_string(),
            params: self.clone(),
        };
        std::fs::write(path, serde_json::to_string(&ckpt)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {}", ckpt.version)));
        }
        Ok(ckpt.params)
    }
}

/// Uniform fan-in initialization, deterministic in the stream.
pub fn init_model(config: &LearnerConfig, rng: &RngStream) -> ModelParams {
    let mut r = rng.rng();
    let h = config.hidden_dim;
    let encoders = config.dims.iter().map(|&d| Dense::uniform(d, h, &mut r)).collect();
    let heads = config.dims.iter().map(|_| Dense::uniform(h, config.classes, &mut r)).collect();
    let fusion_head = Dense::uniform(h, config.classes, &mut r);
    ModelParams {
        encoders,
        heads,
        fusion_head,
    }
}

/// Per-modality features and their weighted fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub per_modality: Vec<Vec<f64>>,
    pub fused: Vec<f64>,
}

pub fn encode(params: &ModelParams, x: &MultimodalInstance, w: &ModalityWeights) -> Result<Encoded> {
    x.check_dims(&params.dims())?;
    if w.len() != params.modalities() {
        return Err(invalid("weight vector length differs from modality count"));
    }
    let per_modality: Vec<Vec<f64>> = params
        .encoders
        .iter()
        .zip(&x.features)
        .map(|(enc, feat)| enc.forward(feat))
        .collect();
    let fused = fuse_features(&per_modality, w.as_slice());
    Ok(Encoded { per_modality, fused })
}

/// `sum_m w_m f_m`, skipping modalities with zero weight.
pub(crate) fn fuse_features(per_modality: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut fused = vec![0.0; per_modality[0].len()];
    for (f, &wm) in per_modality.iter().zip(w) {
        if wm == 0.0 {
            continue;
        }
        for (acc, v) in fused.iter_mut().zip(f) {
            *acc += wm * v;
        }
    }
    fused
}

/// `alpha = softplus(z / T) + 1` elementwise.
pub fn evidence_from_logits(logits: &[f64], temperature: f64) -> DirichletEvidence {
    DirichletEvidence::new_unchecked(logits.iter().map(|z| softplus(z / temperature) + 1.0).collect())
}

/// Raw (untempered) logits of each modality head.
pub fn modality_logits(params: &ModelParams, encoded: &Encoded) -> Vec<Vec<f64>> {
    params
        .heads
        .iter()
        .zip(&encoded.per_modality)
        .map(|(head, f)| head.forward(f))
        .collect()
}

pub fn predict_evidence(
    params: &ModelParams,
    x: &MultimodalInstance,
    temps: &TemperatureSet,
) -> Result<Vec<DirichletEvidence>> {
    x.check_dims(&params.dims())?;
    if temps.len() != params.modalities() {
        return Err(invalid("temperature count differs from modality count"));
    }
    Ok(params
        .encoders
        .iter()
        .zip(&params.heads)
        .zip(&x.features)
        .zip(temps.as_slice())
        .map(|(((enc, head), feat), &t)| evidence_from_logits(&head.forward(&enc.forward(feat)), t))
        .collect())
}

/// Everything the selection stage needs about one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub encoded: Encoded,
    pub alphas: Vec<DirichletEvidence>,
    pub fusion_probs: Vec<f64>,
}

pub fn predict(
    params: &ModelParams,
    x: &MultimodalInstance,
    w: &ModalityWeights,
    temps: &TemperatureSet,
) -> Result<Prediction> {
    let encoded = encode(params, x, w)?;
    let alphas = modality_logits(params, &encoded)
        .iter()
        .zip(temps.as_slice())
        .map(|(z, &t)| evidence_from_logits(z, t))
        .collect();
    let fusion_probs = softmax(&params.fusion_head.forward(&encoded.fused));
    Ok(Prediction {
        encoded,
        alphas,
        fusion_probs,
    })
}

/// Metrics of every modality head and of the multimodal head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub modality: Vec<MetricsReport>,
    pub multimodal: MetricsReport,
}

/// Evaluates all heads on `split`. The multimodal head sees the fused feature
/// built from `w` restricted to `mask` and renormalized (`None` = all).
pub fn evaluate(
    params: &ModelParams,
    split: &[&MultimodalInstance],
    temps: &TemperatureSet,
    w: &ModalityWeights,
    mask: Option<&[usize]>,
) -> Result<EvalReport> {
    if split.is_empty() {
        return Err(precondition("evaluation split is empty"));
    }
    let w_eff = match mask {
        Some(m) => w.restricted(m)?,
        None => w.clone(),
    };
    let m_count = params.modalities();
    let mut modality_rows: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(split.len()); m_count];
    let mut fusion_rows = Vec::with_capacity(split.len());
    let mut labels = Vec::with_capacity(split.len());
    for x in split {
        let label = x
            .label
            .ok_or_else(|| precondition(format!("instance {} has no label", x.id)))?;
        labels.push(label);
        let p = predict(params, x, &w_eff, temps)?;
        for (rows, alpha) in modality_rows.iter_mut().zip(&p.alphas) {
            rows.push(alpha.expected_probs());
        }
        fusion_rows.push(p.fusion_probs);
    }
    let modality = modality_rows
        .iter()
        .map(|rows| compute_metrics(rows, &labels, ECE_BINS))
        .collect::<Result<Vec<_>>>()?;
    let multimodal = compute_metrics(&fusion_rows, &labels, ECE_BINS)?;
    Ok(EvalReport { modality, multimodal })
}

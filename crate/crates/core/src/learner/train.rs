//! Loss, analytic gradients and full-batch gradient descent.
//!
//! Per sample the loss is
//!
//! ```text
//! sum_m [ log a0_m - log a_{m,y} + kl * KL(Dir(a~_m) || Dir(1)) ] + CE(softmax(fusion head), y)
//! ```
//!
//! averaged over the batch, plus `weight_decay * ||theta||^2`. `a~` replaces
//! the true-class concentration with 1.

use serde::{Deserialize, Serialize};

use super::special::{digamma, ln_gamma, sigmoid, softplus, trigamma};
use super::{fuse_features, LearnerConfig, ModelParams};
use crate::error::{precondition, Error, Result};
use crate::simplex::{log_sum_exp, softmax};
use crate::types::{ModalityWeights, MultimodalInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainDiagnostics {
    /// `(loss_E - loss_1) / max(E - 1, 1)`.
    pub loss_slope: f64,
    /// L2 norm of the final epoch's parameter gradient.
    pub grad_norm: f64,
    pub final_loss: f64,
}

/// KL(Dir(alpha) || Dir(1)) and its gradient with respect to alpha.
fn kl_to_uniform(alpha: &[f64]) -> (f64, Vec<f64>) {
    let c = alpha.len() as f64;
    let s: f64 = alpha.iter().sum();
    let psi_s = digamma(s);
    let mut kl = ln_gamma(s) - ln_gamma(c);
    let mut excess = 0.0;
    for &a in alpha {
        kl += -ln_gamma(a) + (a - 1.0) * (digamma(a) - psi_s);
        excess += a - 1.0;
    }
    let tri_s = trigamma(s);
    let grad = alpha.iter().map(|&a| (a - 1.0) * trigamma(a) - tri_s * excess).collect();
    (kl, grad)
}

/// Per-sample loss and gradient with respect to one head's logits.
fn evidential_term(logits: &[f64], label: usize, kl_coeff: f64) -> (f64, Vec<f64>) {
    let alpha: Vec<f64> = logits.iter().map(|&z| softplus(z) + 1.0).collect();
    let a0: f64 = alpha.iter().sum();
    let mut loss = a0.ln() - alpha[label].ln();
    let mut d_alpha: Vec<f64> = alpha.iter().map(|_| 1.0 / a0).collect();
    d_alpha[label] -= 1.0 / alpha[label];

    if kl_coeff > 0.0 {
        let mut masked = alpha.clone();
        masked[label] = 1.0;
        let (kl, g) = kl_to_uniform(&masked);
        loss += kl_coeff * kl;
        for (c, (d, gk)) in d_alpha.iter_mut().zip(g).enumerate() {
            if c != label {
                *d += kl_coeff * gk;
            }
        }
    }
    let d_logits = d_alpha.iter().zip(logits).map(|(d, &z)| d * sigmoid(z)).collect();
    (loss, d_logits)
}

fn labelled<'a>(batch: &'a [&'a MultimodalInstance]) -> Result<Vec<usize>> {
    batch
        .iter()
        .map(|x| {
            x.label
                .ok_or_else(|| precondition(format!("training instance {} has no label", x.id)))
        })
        .collect()
}

/// Mean loss over `batch` and its gradient, laid out like `params`.
pub fn loss_and_grad(
    params: &ModelParams,
    batch: &[&MultimodalInstance],
    w: &ModalityWeights,
    config: &LearnerConfig,
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(precondition("training set is empty"));
    }
    let labels = labelled(batch)?;
    let dims = params.dims();
    let mut grad = ModelParams {
        encoders: params.encoders.iter().map(|d| super::Dense::zeros(d.inp, d.out)).collect(),
        heads: params.heads.iter().map(|d| super::Dense::zeros(d.inp, d.out)).collect(),
        fusion_head: super::Dense::zeros(params.fusion_head.inp, params.fusion_head.out),
    };
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;

    for (x, &y) in batch.iter().zip(&labels) {
        x.check_dims(&dims)?;
        let feats: Vec<Vec<f64>> = params
            .encoders
            .iter()
            .zip(&x.features)
            .map(|(e, v)| e.forward(v))
            .collect();
        let mut d_feats: Vec<Vec<f64>> = Vec::with_capacity(feats.len());

        for ((head, f), ghead) in params.heads.iter().zip(&feats).zip(grad.heads.iter_mut()) {
            let (l, dz) = evidential_term(&head.forward(f), y, config.kl_coeff);
            total += l;
            let dz: Vec<f64> = dz.iter().map(|g| g * scale).collect();
            ghead.accumulate(&dz, f);
            d_feats.push(head.backward_input(&dz));
        }

        let fused = fuse_features(&feats, w.as_slice());
        let z = params.fusion_head.forward(&fused);
        total += log_sum_exp(&z) - z[y];
        let mut dz = softmax(&z);
        dz[y] -= 1.0;
        for g in dz.iter_mut() {
            *g *= scale;
        }
        grad.fusion_head.accumulate(&dz, &fused);
        let d_fused = params.fusion_head.backward_input(&dz);

        for (m, ((genc, df), xm)) in grad
            .encoders
            .iter_mut()
            .zip(d_feats.iter_mut())
            .zip(&x.features)
            .enumerate()
        {
            let wm = w.get(m);
            for (a, b) in df.iter_mut().zip(&d_fused) {
                *a += wm * b;
            }
            genc.accumulate(df, xm);
        }
    }

    let mut loss = total * scale;
    if config.weight_decay > 0.0 {
        loss += config.weight_decay * params.sq_norm();
        for (g, p) in grad
            .blocks_mut()
            .zip(params.blocks())
            .flat_map(|(g, p)| g.values_mut().zip(p.values()))
        {
            *g += 2.0 * config.weight_decay * p;
        }
    }
    Ok((loss, grad))
}

pub fn total_loss(
    params: &ModelParams,
    batch: &[&MultimodalInstance],
    w: &ModalityWeights,
    config: &LearnerConfig,
) -> Result<f64> {
    loss_and_grad(params, batch, w, config).map(|(l, _)| l)
}

/// Runs `config.epochs` full-batch gradient steps from `params`.
pub fn train(
    params: &ModelParams,
    labeled: &[&MultimodalInstance],
    w: &ModalityWeights,
    config: &LearnerConfig,
) -> Result<(ModelParams, TrainDiagnostics)> {
    if labeled.is_empty() {
        return Err(precondition("cannot train on an empty labeled set"));
    }
    let mut current = params.clone();
    let mut first_loss = 0.0;
    let mut last_loss = 0.0;
    let mut grad_norm = 0.0;
    for epoch in 0..config.epochs {
        let (loss, grad) = loss_and_grad(&current, labeled, w, config)?;
        if !loss.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite loss at epoch {}", epoch + 1)));
        }
        if epoch == 0 {
            first_loss = loss;
        }
        last_loss = loss;
        grad_norm = grad.sq_norm().sqrt();
        if config.learning_rate > 0.0 {
            for (p, g) in current
                .blocks_mut()
                .zip(grad.blocks())
                .flat_map(|(p, g)| p.values_mut().zip(g.values()))
            {
                *p -= config.learning_rate * g;
            }
        }
    }
    if !current.is_finite() {
        return Err(Error::NumericalFailure("parameters diverged".into()));
    }
    let span = config.epochs.saturating_sub(1).max(1) as f64;
    Ok((
        current,
        TrainDiagnostics {
            loss_slope: (last_loss - first_loss) / span,
            grad_norm,
            final_loss: last_loss,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::init_model;
    use crate::rng::RngStream;
    use rand::Rng;

    fn toy(seed: u64, n: usize, dims: &[usize], classes: usize) -> Vec<MultimodalInstance> {
        let mut r = RngStream::new(seed, "toy").rng();
        (0..n)
            .map(|id| MultimodalInstance {
                id,
                label: Some(r.random_range(0..classes)),
                features: dims
                    .iter()
                    .map(|&d| (0..d).map(|_| r.random_range(-1.5..1.5)).collect())
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn kl_gradient_matches_fd() {
        let alpha = [1.0, 2.5, 7.0, 1.3];
        let (_, g) = kl_to_uniform(&alpha);
        for k in 0..alpha.len() {
            let h = 1e-6;
            let mut up = alpha;
            up[k] += h;
            let mut dn = alpha;
            dn[k] -= h;
            let fd = (kl_to_uniform(&up).0 - kl_to_uniform(&dn).0) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6, "k={k} fd={fd} g={}", g[k]);
        }
        assert!(kl_to_uniform(&[1.0, 1.0, 1.0]).0.abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let cfg = LearnerConfig {
            dims: vec![3, 2],
            hidden_dim: 4,
            classes: 3,
            learning_rate: 0.0,
            epochs: 5,
            ..LearnerConfig::default()
        };
        let data = toy(1, 6, &cfg.dims, 3);
        let batch: Vec<&MultimodalInstance> = data.iter().collect();
        let p = init_model(&cfg, &RngStream::new(1, "init"));
        let (q, diag) = train(&p, &batch, &ModalityWeights::uniform(2), &cfg).unwrap();
        assert_eq!(p, q);
        assert_eq!(diag.loss_slope, 0.0);
    }

    #[test]
    fn single_sample_loss_decreases() {
        let cfg = LearnerConfig {
            dims: vec![3, 2],
            hidden_dim: 4,
            classes: 2,
            learning_rate: 0.05,
            epochs: 1,
            ..LearnerConfig::default()
        };
        let data = toy(2, 1, &cfg.dims, 2);
        let batch: Vec<&MultimodalInstance> = data.iter().collect();
        let w = ModalityWeights::uniform(2);
        let mut p = init_model(&cfg, &RngStream::new(2, "init"));
        let mut losses = Vec::new();
        for _ in 0..400 {
            losses.push(total_loss(&p, &batch, &w, &cfg).unwrap());
            p = train(&p, &batch, &w, &cfg).unwrap().0;
        }
        let ok = losses.windows(2).filter(|w| w[1] <= w[0]).count();
        assert!(ok as f64 >= 0.95 * (losses.len() - 1) as f64, "{ok}");
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let cfg = LearnerConfig {
            dims: vec![3, 2],
            hidden_dim: 3,
            classes: 3,
            weight_decay: 0.01,
            kl_coeff: 0.05,
            ..LearnerConfig::default()
        };
        let data = toy(3, 2, &cfg.dims, 3);
        let batch: Vec<&MultimodalInstance> = data.iter().collect();
        let w = ModalityWeights::new(vec![0.35, 0.65]).unwrap();
        let p = init_model(&cfg, &RngStream::new(3, "init"));
        let (_, grad) = loss_and_grad(&p, &batch, &w, &cfg).unwrap();
        let g = grad.to_flat();
        let base = p.to_flat();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..base.len() {
            let mut q = p.clone();
            let mut v = base.clone();
            v[i] += h;
            q.set_flat(&v);
            let up = total_loss(&q, &batch, &w, &cfg).unwrap();
            v[i] -= 2.0 * h;
            q.set_flat(&v);
            let dn = total_loss(&q, &batch, &w, &cfg).unwrap();
            let fd = (up - dn) / (2.0 * h);
            let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-5, "max relative error {worst}");
    }

    #[test]
    fn empty_or_unlabeled_batch_rejected() {
        let cfg = LearnerConfig::default();
        let p = ModelParams::zeros(&cfg);
        let w = ModalityWeights::uniform(2);
        assert!(train(&p, &[], &w, &cfg).is_err());
        let x = MultimodalInstance {
            id: 0,
            label: None,
            features: vec![vec![0.0; 16]; 2],
        };
        assert!(train(&p, &[&x], &w, &cfg).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = LearnerConfig {
            dims: vec![3, 2],
            hidden_dim: 4,
            classes: 3,
            epochs: 10,
            ..LearnerConfig::default()
        };
        let data = toy(5, 12, &cfg.dims, 3);
        let batch: Vec<&MultimodalInstance> = data.iter().collect();
        let w = ModalityWeights::uniform(2);
        let p = init_model(&cfg, &RngStream::new(5, "init"));
        let a = train(&p, &batch, &w, &cfg).unwrap();
        let b = train(&p, &batch, &w, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}

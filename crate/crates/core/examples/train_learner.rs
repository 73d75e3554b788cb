//! Training the evidential learner, calibrating temperatures and evaluating.

use mbal::harness::{generate_synthetic, stratified_split, SyntheticSpec};
use mbal::learner::{evaluate, fit_temperatures, init_model, train, LearnerConfig};
use mbal::{ModalityWeights, RngStream};

fn main() -> mbal::Result<()> {
    let spec = SyntheticSpec {
        dims: vec![8, 8],
        classes: 4,
        samples: 800,
        informativeness: vec![0.8, 0.3],
        noise: 1.0,
        drift_threshold: None,
    };
    let data = generate_synthetic(&spec, &RngStream::new(1, "data"))?;
    let part = stratified_split(&data, 0.25, 200, &RngStream::new(1, "split"))?;
    let cfg = LearnerConfig {
        dims: spec.dims.clone(),
        classes: spec.classes,
        hidden_dim: 16,
        learning_rate: 0.5,
        epochs: 40,
        ..LearnerConfig::default()
    };
    let w = ModalityWeights::uniform(2);
    let labeled = data.select(&part.labeled);
    let val = data.select(&part.validation);

    let mut params = init_model(&cfg, &RngStream::new(1, "init"));
    for block in 1..=4 {
        let (next, diag) = train(&params, &labeled, &w, &cfg)?;
        params = next;
        let temps = fit_temperatures(&params, &val)?;
        let report = evaluate(&params, &val, &temps, &w, None)?;
        println!(
            "epochs {:>3}: loss {:.4} slope {:+.4} | top1 modality {:.3} / {:.3}, fused {:.3} (nll {:.3}, ece {:.3}) | T {:.2?}",
            block * cfg.epochs,
            diag.final_loss,
            diag.loss_slope,
            report.modality[0].top1,
            report.modality[1].top1,
            report.multimodal.top1,
            report.multimodal.nll,
            report.multimodal.ece,
            temps.as_slice()
        );
    }
    Ok(())
}

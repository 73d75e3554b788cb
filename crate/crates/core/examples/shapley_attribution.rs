//! Exact Shapley attribution of validation accuracy to modalities.

use mbal::harness::{generate_synthetic, shapley_contributions, stratified_split, SyntheticSpec};
use mbal::learner::{fit_temperatures, init_model, train, LearnerConfig};
use mbal::{ModalityWeights, RngStream};

fn main() -> mbal::Result<()> {
    let spec = SyntheticSpec {
        dims: vec![6, 6, 6],
        classes: 3,
        samples: 600,
        informativeness: vec![0.9, 0.4, 0.0],
        noise: 1.0,
        drift_threshold: None,
    };
    let data = generate_synthetic(&spec, &RngStream::new(2, "data"))?;
    let part = stratified_split(&data, 0.3, 300, &RngStream::new(2, "split"))?;
    let cfg = LearnerConfig {
        dims: spec.dims.clone(),
        classes: spec.classes,
        hidden_dim: 12,
        learning_rate: 0.5,
        epochs: 150,
        ..LearnerConfig::default()
    };
    let w = ModalityWeights::uniform(3);
    let (params, _) = train(&init_model(&cfg, &RngStream::new(2, "init")), &data.select(&part.labeled), &w, &cfg)?;
    let val = data.select(&part.validation);
    let temps = fit_temperatures(&params, &val)?;
    let report = shapley_contributions(&params, &val, &temps, &w)?;

    for (mask, v) in report.coalition_values.iter().enumerate() {
        let members: Vec<usize> = (0..3).filter(|m| mask & (1 << m) != 0).map(|m| m + 1).collect();
        println!("v({members:?}) = {v:.3}");
    }
    println!("phi = {:.4?}", report.phi);
    let total: f64 = report.phi.iter().sum();
    let span = report.coalition_values[7] - report.coalition_values[0];
    println!("sum phi = {total:.4} = v(all) - v(empty) = {span:.4}");
    Ok(())
}

//! Sampling a batch from the candidate policy and applying one REINFORCE step.

use mbal::policy::{reinforce_update, sample_batch, PolicyParams, RoundState};
use mbal::RngStream;
use rand::Rng;

fn main() -> mbal::Result<()> {
    let stream = RngStream::new(3, "policy-example");
    let mut rng = stream.child("data").rng();
    let state = RoundState {
        raw: vec![0.6, 0.4, 0.05, -0.1, 0.1, 0.5, 0.4, -0.02, 0.3],
        values: vec![0.0; 9],
    };
    let candidates: Vec<Vec<f64>> = (0..12)
        .map(|_| (0..5).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let ids: Vec<usize> = (100..112).collect();

    let mut theta = PolicyParams::random(state.len() + 5, 16, &stream.child("init"));
    for round in 1..=3 {
        let logits = theta.logits(&state.values, &candidates)?;
        let action = sample_batch(&logits, &ids, 4, &mut stream.child(&format!("sample{round}")).rng())?;
        println!(
            "round {round}: picked {:?} log-prob {:.3} (steps {:.3?})",
            action.ids, action.log_prob, action.step_log_probs
        );
        let before = action.log_prob;
        theta = reinforce_update(&theta, &state, &candidates, &action, 0.5, 0.05)?;
        let after = mbal::policy::sequence_log_prob(&theta.logits(&state.values, &candidates)?, &action.positions)?;
        println!("          positive advantage raised its log-prob {before:.3} -> {after:.3}");
    }
    Ok(())
}

//! Round state, candidate-conditioned selection policy, batch sampling,
//! rewards and the REINFORCE update.

mod network;
mod reward;
mod sampling;
mod state;

pub use network::{PolicyParams, DEFAULT_HIDDEN};
pub use reward::{
    raw_reward, LearningCurve, RewardMode, RewardTrace, RewardTracker, CURVE_HEADER, DEFAULT_CLIP, DEFAULT_EMA,
};
pub use sampling::{log_prob_gradient, logit_coefficients, sample_batch, sequence_log_prob, BatchAction};
pub use state::{build_state, candidate_features, raw_state, state_len, RoundState, StateHistory, STD_FLOOR};

use crate::error::{Error, Result};

pub const DEFAULT_POLICY_LR: f64 = 1e-2;

/// One gradient-ascent step `theta + lr * A * grad log pi(action | state)`.
pub fn reinforce_update(
    theta: &PolicyParams,
    state: &RoundState,
    candidates: &[Vec<f64>],
    action: &BatchAction,
    advantage: f64,
    lr: f64,
) -> Result<PolicyParams> {
    if !action.log_prob.is_finite() {
        return Err(Error::NumericalFailure("action log-probability is not finite".into()));
    }
    if advantage == 0.0 || lr == 0.0 {
        return Ok(theta.clone());
    }
    let grad = log_prob_gradient(theta, &state.values, candidates, &action.positions)?;
    let mut flat = theta.to_flat();
    for (p, g) in flat.iter_mut().zip(&grad) {
        *p += lr * advantage * g;
    }
    let mut next = theta.clone();
    next.set_flat(&flat);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn toy() -> (PolicyParams, RoundState, Vec<Vec<f64>>) {
        let theta = PolicyParams::random(4, 3, &RngStream::new(1, "toy"));
        let state = RoundState {
            raw: vec![0.5, -0.2],
            values: vec![0.5, -0.2],
        };
        let cands = vec![vec![0.1, 0.9], vec![0.7, 0.3], vec![0.4, 0.4]];
        (theta, state, cands)
    }

    #[test]
    fn zero_advantage_leaves_params_untouched() {
        let (theta, state, cands) = toy();
        let z = theta.logits(&state.values, &cands).unwrap();
        let a = sample_batch(&z, &[0, 1, 2], 2, &mut RngStream::new(2, "s").rng()).unwrap();
        let next = reinforce_update(&theta, &state, &cands, &a, 0.0, 0.1).unwrap();
        assert_eq!(next, theta);
    }

    #[test]
    fn positive_advantage_raises_action_probability() {
        let (mut theta, state, cands) = toy();
        let z = theta.logits(&state.values, &cands).unwrap();
        let a = sample_batch(&z, &[0, 1, 2], 2, &mut RngStream::new(3, "s").rng()).unwrap();
        let mut prev = a.log_prob;
        for _ in 0..50 {
            theta = reinforce_update(&theta, &state, &cands, &a, 0.5, 0.05).unwrap();
            let lp = sequence_log_prob(&theta.logits(&state.values, &cands).unwrap(), &a.positions).unwrap();
            assert!(lp >= prev - 1e-12);
            prev = lp;
        }
    }

    #[test]
    fn log_prob_gradient_matches_central_differences() {
        // 3 candidates, b = 2, a 3 -> 2 -> 1 MLP with 11 parameters
        let theta = PolicyParams::random(3, 2, &RngStream::new(4, "fd"));
        assert_eq!(theta.num_params(), 11);
        let state = [0.3];
        let cands = vec![vec![0.2, -0.4], vec![1.0, 0.5], vec![-0.6, 0.1]];
        let positions = [2, 0];
        let grad = log_prob_gradient(&theta, &state, &cands, &positions).unwrap();
        let base = theta.to_flat();
        let h = 1e-5;
        for i in 0..base.len() {
            let eval = |delta: f64| {
                let mut t = theta.clone();
                let mut v = base.clone();
                v[i] += delta;
                t.set_flat(&v);
                sequence_log_prob(&t.logits(&state, &cands).unwrap(), &positions).unwrap()
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
            assert!(rel < 1e-4, "param {i}: fd {fd} vs {}", grad[i]);
        }
    }
}

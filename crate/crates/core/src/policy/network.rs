//! Two-layer tanh MLP mapping `[state || candidate features]` to a logit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::learner::Dense;
use crate::rng::RngStream;

pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub hidden: Dense,
    pub output: Dense,
}

impl PolicyParams {
    /// Fan-in uniform first layer; zero output layer, so the initial policy
    /// is uniform over any candidate set.
    pub fn new(input_dim: usize, hidden_dim: usize, rng: &RngStream) -> Self {
        let mut r = rng.rng();
        Self {
            hidden: Dense::uniform(input_dim, hidden_dim, &mut r),
            output: Dense::zeros(hidden_dim, 1),
        }
    }

    /// Both layers fan-in uniform.
    pub fn random(input_dim: usize, hidden_dim: usize, rng: &RngStream) -> Self {
        let mut r = rng.rng();
        Self {
            hidden: Dense::uniform(input_dim, hidden_dim, &mut r),
            output: Dense::uniform(hidden_dim, 1, &mut r),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.inp
    }

    pub fn num_params(&self) -> usize {
        self.hidden.num_params() + self.output.num_params()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.hidden.values().chain(self.output.values()).copied().collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        for (slot, v) in self.hidden.values_mut().chain(self.output.values_mut()).zip(flat) {
            *slot = *v;
        }
    }

    fn input(&self, state: &[f64], features: &[f64]) -> Result<Vec<f64>> {
        if state.len() + features.len() != self.input_dim() {
            return Err(invalid(format!(
                "policy expects {} inputs, got {}",
                self.input_dim(),
                state.len() + features.len()
            )));
        }
        let mut x = Vec::with_capacity(self.input_dim());
        x.extend_from_slice(state);
        x.extend_from_slice(features);
        Ok(x)
    }

    fn activations(&self, x: &[f64]) -> Vec<f64> {
        self.hidden.forward(x).into_iter().map(f64::tanh).collect()
    }

    pub fn logit(&self, state: &[f64], features: &[f64]) -> Result<f64> {
        let x = self.input(state, features)?;
        Ok(self.output.forward(&self.activations(&x))[0])
    }

    /// Logits for every candidate.
    pub fn logits(&self, state: &[f64], candidates: &[Vec<f64>]) -> Result<Vec<f64>> {
        candidates.iter().map(|f| self.logit(state, f)).collect()
    }

    /// `sum_i coef[i] * grad_theta z(candidate_i)`, flattened like [`Self::to_flat`].
    pub fn weighted_logit_grad(&self, state: &[f64], candidates: &[Vec<f64>], coef: &[f64]) -> Result<Vec<f64>> {
        let mut g_hidden = Dense::zeros(self.hidden.inp, self.hidden.out);
        let mut g_out = Dense::zeros(self.output.inp, 1);
        for (f, &c) in candidates.iter().zip(coef) {
            if c == 0.0 {
                continue;
            }
            let x = self.input(state, f)?;
            let h = self.activations(&x);
            g_out.accumulate(&[c], &h);
            let dh: Vec<f64> = self
                .output
                .weight
                .iter()
                .zip(&h)
                .map(|(w, hv)| c * w * (1.0 - hv * hv))
                .collect();
            g_hidden.accumulate(&dh, &x);
        }
        let flat: Vec<f64> = g_hidden.values().chain(g_out.values()).copied().collect();
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite policy gradient".into()));
        }
        Ok(flat)
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Affine map `y = W x + b` with `W` stored row-major (`out x inp`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inp: usize,
    pub out: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inp: usize, out: usize) -> Self {
        Self {
            inp,
            out,
            weight: vec![0.0; inp * out],
            bias: vec![0.0; out],
        }
    }

    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero biases.
    pub fn uniform<R: Rng>(inp: usize, out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inp as f64).sqrt();
        let weight = (0..inp * out).map(|_| rng.random_range(-bound..=bound)).collect();
        Self {
            inp,
            out,
            weight,
            bias: vec![0.0; out],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.inp);
        self.weight
            .chunks_exact(self.inp)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    /// `W^T g`.
    pub fn backward_input(&self, grad_out: &[f64]) -> Vec<f64> {
        let mut gx = vec![0.0; self.inp];
        for (row, g) in self.weight.chunks_exact(self.inp).zip(grad_out) {
            if *g == 0.0 {
                continue;
            }
            for (acc, w) in gx.iter_mut().zip(row) {
                *acc += g * w;
            }
        }
        gx
    }

    /// Accumulates `g x^T` into the weight gradient and `g` into the bias gradient.
    pub fn accumulate(&mut self, grad_out: &[f64], x: &[f64]) {
        for ((row, bias), g) in self
            .weight
            .chunks_exact_mut(self.inp)
            .zip(self.bias.iter_mut())
            .zip(grad_out)
        {
            *bias += g;
            if *g == 0.0 {
                continue;
            }
            for (acc, v) in row.iter_mut().zip(x) {
                *acc += g * v;
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.weight.iter().chain(self.bias.iter())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weight.iter_mut().chain(self.bias.iter_mut())
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

/// Optimizer hyperparameters plus per-parameter moment buffers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl Optimizer {
    pub fn sgd(learning_rate: f64, momentum: f64) -> Self {
        Self::new(OptimizerKind::Sgd { momentum }, learning_rate)
    }

    pub fn adam(learning_rate: f64, beta1: f64, beta2: f64) -> Self {
        Self::new(OptimizerKind::Adam { beta1, beta2, eps: 1e-8 }, learning_rate)
    }

    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Self { kind, learning_rate, first: Vec::new(), second: Vec::new(), step: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update. Moment buffers are sized on first use.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(NnError::Mismatch { expected: vec![params.len()], actual: vec![grads.len()] });
        }
        if self.first.is_empty() {
            self.first = vec![0.0; params.len()];
            if matches!(self.kind, OptimizerKind::Adam { .. }) {
                self.second = vec![0.0; params.len()];
            }
        } else if self.first.len() != params.len() {
            return Err(NnError::Mismatch { expected: vec![self.first.len()], actual: vec![params.len()] });
        }
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                for ((p, &g), v) in params.iter_mut().zip(grads).zip(self.first.iter_mut()) {
                    *v = momentum * *v + g;
                    *p -= lr * *v;
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.first[i] = beta1 * self.first[i] + (1.0 - beta1) * g;
                    self.second[i] = beta2 * self.second[i] + (1.0 - beta2) * g * g;
                    let m = self.first[i] / c1;
                    let v = self.second[i] / c2;
                    params[i] -= lr * m / (v.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_sgd_on_quadratic() {
        // f(x) = 0.5 * x^2, gradient x.
        let mut x = [4.0];
        let mut opt = Optimizer::sgd(0.25, 0.0);
        for k in 1..=5 {
            let g = [x[0]];
            opt.step(&mut x, &g).unwrap();
            assert!((x[0] - 4.0 * 0.75f64.powi(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn adam_zero_betas_is_normalized_step() {
        let mut x = [3.0, -0.5];
        let mut opt = Optimizer::new(OptimizerKind::Adam { beta1: 0.0, beta2: 0.0, eps: 1e-8 }, 0.1);
        let g = [6.0, -0.001];
        opt.step(&mut x, &g).unwrap();
        assert!((x[0] - (3.0 - 0.1 * 6.0 / (6.0 + 1e-8))).abs() < 1e-15);
        assert!((x[1] - (-0.5 + 0.1 * 0.001 / (0.001 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let mut x = [1.0, 2.0];
        let mut opt = Optimizer::adam(0.0, 0.9, 0.999);
        opt.step(&mut x, &[0.5, -0.5]).unwrap();
        assert_eq!(x, [1.0, 2.0]);
    }
}

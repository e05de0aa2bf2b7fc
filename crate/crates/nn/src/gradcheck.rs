use rand::seq::index::sample;
use rand::SeedableRng;

use crate::error::Result;
use crate::loss::Loss;
use crate::network::Network;
use crate::tensor::Tensor;

/// Denominator floor for the relative error, so parameters whose true
/// gradient is zero compare on an absolute scale.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub n_compared: usize,
    /// True when no parameter was compared.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Above this parameter count a seeded random subset of this size is checked.
    pub max_params: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self { epsilon: 1e-5, max_params: 10_000, seed: 0 }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares backprop gradients with central differences.
pub fn grad_check(net: &Network, loss: Loss, input: &Tensor, target: &Tensor, opts: &GradCheckOptions) -> Result<GradCheckReport> {
    let n = net.param_count();
    let indices: Vec<usize> = if n <= opts.max_params {
        (0..n).collect()
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
        let mut v = sample(&mut rng, n, opts.max_params).into_vec();
        v.sort_unstable();
        v
    };
    grad_check_indices(net, loss, input, target, opts.epsilon, &indices)
}

pub fn grad_check_indices(
    net: &Network,
    loss: Loss,
    input: &Tensor,
    target: &Tensor,
    epsilon: f64,
    indices: &[usize],
) -> Result<GradCheckReport> {
    if indices.is_empty() {
        return Ok(GradCheckReport { max_rel_error: 0.0, n_compared: 0, degenerate: true });
    }
    let (_, analytic) = crate::train::loss_and_grad(net, loss, input, target)?;
    let mut probe = net.clone();
    let mut max_rel_error: f64 = 0.0;
    for &i in indices {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + epsilon;
        let (plus, _) = loss.evaluate(&probe.predict(input)?, target)?;
        probe.params_mut()[i] = orig - epsilon;
        let (minus, _) = loss.evaluate(&probe.predict(input)?, target)?;
        probe.params_mut()[i] = orig;
        let numeric = (plus - minus) / (2.0 * epsilon);
        max_rel_error = max_rel_error.max(relative_error(analytic[i], numeric));
    }
    Ok(GradCheckReport { max_rel_error, n_compared: indices.len(), degenerate: false })
}

/// Input-gradient check for a scalar function `sum(weights * output)`.
pub fn input_grad_check(net: &Network, input: &Tensor, epsilon: f64) -> Result<f64> {
    let trace = net.forward(input)?;
    let out = trace.output();
    let weights: Vec<f64> = (0..out.len()).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();
    let grad_out = Tensor::new(out.shape().to_vec(), weights.clone())?;
    let analytic = net.backward(&trace, &grad_out, None)?;
    let f = |x: &Tensor| -> Result<f64> {
        Ok(net.predict(x)?.data().iter().zip(&weights).map(|(a, b)| a * b).sum())
    };
    let mut x = input.clone();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let orig = x.data()[i];
        x.data_mut()[i] = orig + epsilon;
        let plus = f(&x)?;
        x.data_mut()[i] = orig - epsilon;
        let minus = f(&x)?;
        x.data_mut()[i] = orig;
        worst = worst.max(relative_error(analytic.data()[i], (plus - minus) / (2.0 * epsilon)));
    }
    Ok(worst)
}

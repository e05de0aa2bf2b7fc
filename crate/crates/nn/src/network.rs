use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{NnError, Result};
use crate::layers::{self, Activation, LayerSpec};
use crate::tensor::Tensor;

/// Ordered layer list plus the per-sample input shape and init seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub seed: u64,
}

impl NetworkSpec {
    pub fn new(input_shape: Vec<usize>, layers: Vec<LayerSpec>, seed: u64) -> Self {
        Self { input_shape, layers, seed }
    }

    /// Per-sample shapes before every layer and after the last one.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        let mut shapes = vec![self.input_shape.clone()];
        for (i, layer) in self.layers.iter().enumerate() {
            let next = layer.output_shape(i, shapes.last().unwrap())?;
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::param_count).sum()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> [u8; 32] {
        let json = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&json);
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

/// Intermediate values of one forward pass, needed by [`Network::backward`].
#[derive(Debug, Clone)]
pub struct Trace {
    /// `activations[i]` is the input of layer `i`; the last entry is the output.
    pub activations: Vec<Tensor>,
    cols: Vec<Option<Vec<f64>>>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.activations.last().expect("trace has an output")
    }
}

/// A network is a validated spec with its flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    spec: NetworkSpec,
    shapes: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    params: Vec<f64>,
}

impl Network {
    /// Builds the network with uniform He-style weights `U(-√(6/fan_in), √(6/fan_in))`
    /// drawn from the spec seed, zero biases and masked taps zeroed.
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        let shapes = spec.shapes()?;
        let mut offsets = Vec::with_capacity(spec.layers.len() + 1);
        let mut total = 0;
        for layer in &spec.layers {
            offsets.push(total);
            total += layer.param_count();
        }
        offsets.push(total);
        let mut rng = riga_rng(spec.seed);
        let mut params = vec![0.0; total];
        for (i, layer) in spec.layers.iter().enumerate() {
            let nw = layer.weight_count();
            if nw == 0 {
                continue;
            }
            let bound = (6.0 / layer.fan_in() as f64).sqrt();
            let w = &mut params[offsets[i]..offsets[i] + nw];
            for v in w.iter_mut() {
                *v = rng.random_range(-bound..bound);
            }
            if let LayerSpec::MaskedConv2d { in_ch, out_ch, kernel, mask, cond_ch } = *layer {
                for (v, m) in w.iter_mut().zip(layers::weight_mask(in_ch, out_ch, kernel, mask, cond_ch)) {
                    *v *= m;
                }
            }
        }
        Ok(Self { spec, shapes, offsets, params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.shapes[0]
    }

    pub fn output_shape(&self) -> &[usize] {
        self.shapes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Parameter slice of layer `i` (weights then biases).
    pub fn layer_params(&self, i: usize) -> &[f64] {
        &self.params[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn layer_params_mut(&mut self, i: usize) -> &mut [f64] {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        &mut self.params[a..b]
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(NnError::Mismatch { expected: vec![self.params.len()], actual: vec![params.len()] });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn check_input(&self, input: &Tensor) -> Result<usize> {
        if input.shape().len() != self.shapes[0].len() + 1 || input.shape()[1..] != self.shapes[0][..] {
            let mut expected = vec![input.batch()];
            expected.extend_from_slice(&self.shapes[0]);
            return Err(NnError::Mismatch { expected, actual: input.shape().to_vec() });
        }
        Ok(input.batch())
    }

    fn masked_weights(&self, i: usize) -> Option<Vec<f64>> {
        if let LayerSpec::MaskedConv2d { in_ch, out_ch, kernel, mask, cond_ch } = self.spec.layers[i] {
            let w = &self.layer_params(i)[..self.spec.layers[i].weight_count()];
            let m = layers::weight_mask(in_ch, out_ch, kernel, mask, cond_ch);
            Some(w.iter().zip(m).map(|(a, b)| a * b).collect())
        } else {
            None
        }
    }

    /// Batched forward pass keeping every intermediate activation.
    pub fn forward(&self, input: &Tensor) -> Result<Trace> {
        let batch = self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.spec.layers.len() + 1);
        let mut cols = Vec::with_capacity(self.spec.layers.len());
        activations.push(input.clone());
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let x = activations.last().unwrap();
            let mut shape = vec![batch];
            shape.extend_from_slice(&self.shapes[i + 1]);
            let mut y = Tensor::zeros(shape);
            let params = self.layer_params(i);
            let mut col = None;
            match layer {
                LayerSpec::Dense { input, output } => {
                    layers::dense_forward(*input, *output, params, x.data(), batch, y.data_mut());
                }
                LayerSpec::Conv2d { out_ch, .. } | LayerSpec::MaskedConv2d { out_ch, .. } => {
                    let g = layers::conv_geom(layer, &self.shapes[i], &self.shapes[i + 1]).unwrap();
                    let nw = layer.weight_count();
                    let masked = self.masked_weights(i);
                    let w = masked.as_deref().unwrap_or(&params[..nw]);
                    col = Some(layers::conv_forward(&g, *out_ch, w, &params[nw..], x.data(), batch, y.data_mut()));
                }
                LayerSpec::ConvTranspose2d { in_ch, .. } => {
                    let g = layers::conv_geom(layer, &self.shapes[i], &self.shapes[i + 1]).unwrap();
                    let nw = layer.weight_count();
                    layers::conv_transpose_forward(&g, *in_ch, &params[..nw], &params[nw..], x.data(), batch, y.data_mut());
                }
                LayerSpec::Activation(act) => layers::activate(*act, x.data(), y.data_mut()),
                LayerSpec::Flatten | LayerSpec::Reshape { .. } => y.data_mut().copy_from_slice(x.data()),
            }
            if !y.all_finite() {
                return Err(NnError::NonFinite { layer: i });
            }
            activations.push(y);
            cols.push(col);
        }
        Ok(Trace { activations, cols })
    }

    /// Output only.
    pub fn predict(&self, input: &Tensor) -> Result<Tensor> {
        let mut trace = self.forward(input)?;
        Ok(trace.activations.pop().unwrap())
    }

    /// Backpropagates `grad_output` through the trace, accumulating parameter
    /// gradients into `grads` when given, and returns the input gradient.
    pub fn backward(&self, trace: &Trace, grad_output: &Tensor, mut grads: Option<&mut [f64]>) -> Result<Tensor> {
        let batch = trace.output().batch();
        if grad_output.shape() != trace.output().shape() {
            return Err(NnError::Mismatch { expected: trace.output().shape().to_vec(), actual: grad_output.shape().to_vec() });
        }
        if let Some(g) = grads.as_deref() {
            if g.len() != self.params.len() {
                return Err(NnError::Mismatch { expected: vec![self.params.len()], actual: vec![g.len()] });
            }
        }
        let mut dy = grad_output.clone();
        for (i, layer) in self.spec.layers.iter().enumerate().rev() {
            let x = &trace.activations[i];
            let y = &trace.activations[i + 1];
            let mut dx = Tensor::zeros(x.shape().to_vec());
            let params = self.layer_params(i);
            let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
            let layer_grads = grads.as_deref_mut().map(|g| &mut g[lo..hi]);
            match layer {
                LayerSpec::Dense { input, output } => {
                    layers::dense_backward(*input, *output, params, x.data(), batch, dy.data(), dx.data_mut(), layer_grads);
                }
                LayerSpec::Conv2d { out_ch, .. } | LayerSpec::MaskedConv2d { out_ch, .. } => {
                    let g = layers::conv_geom(layer, &self.shapes[i], &self.shapes[i + 1]).unwrap();
                    let nw = layer.weight_count();
                    let masked = self.masked_weights(i);
                    let w = masked.as_deref().unwrap_or(&params[..nw]);
                    let cols = trace.cols[i].as_ref().expect("conv trace keeps columns");
                    let split = layer_grads.map(|g| g.split_at_mut(nw));
                    let has_grads = split.is_some();
                    layers::conv_backward(&g, *out_ch, w, cols, batch, dy.data(), dx.data_mut(), split);
                    if has_grads {
                        if let LayerSpec::MaskedConv2d { in_ch, out_ch, kernel, mask, cond_ch } = *layer {
                            let gw = &mut grads.as_deref_mut().unwrap()[lo..lo + nw];
                            for (v, m) in gw.iter_mut().zip(layers::weight_mask(in_ch, out_ch, kernel, mask, cond_ch)) {
                                *v *= m;
                            }
                        }
                    }
                }
                LayerSpec::ConvTranspose2d { in_ch, .. } => {
                    let g = layers::conv_geom(layer, &self.shapes[i], &self.shapes[i + 1]).unwrap();
                    let nw = layer.weight_count();
                    let split = layer_grads.map(|g| g.split_at_mut(nw));
                    layers::conv_transpose_backward(&g, *in_ch, &params[..nw], x.data(), batch, dy.data(), dx.data_mut(), split);
                }
                LayerSpec::Activation(act) => {
                    layers::activate_backward(*act, x.data(), y.data(), dy.data(), dx.data_mut());
                }
                LayerSpec::Flatten | LayerSpec::Reshape { .. } => dx.data_mut().copy_from_slice(dy.data()),
            }
            dy = dx;
        }
        Ok(dy)
    }
}

fn riga_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Convenience builder for the common conv → activation stacks.
pub fn with_activation(layers: Vec<LayerSpec>, act: Activation) -> Vec<LayerSpec> {
    let mut out = Vec::with_capacity(layers.len() * 2);
    for l in layers {
        out.push(l);
        out.push(LayerSpec::Activation(act));
    }
    out
}

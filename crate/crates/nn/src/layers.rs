//! Layer descriptors and their batched forward/backward kernels.
//!
//! Parameters live in one flat buffer owned by the network; each layer sees
//! its own slice. Weight layouts:
//! - dense: `[out][in]`, then `out` biases
//! - conv / masked conv: `[out_ch][in_ch][k][k]`, then `out_ch` biases
//! - transposed conv: `[in_ch][out_ch][k][k]`, then `out_ch` biases

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::linalg::{col2im, gemm, im2col, ConvGeom};

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    LeakyRelu,
    Sigmoid,
    Tanh,
}

/// Raster-order causal masks: type A hides the centre tap, type B keeps it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskType {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSpec {
    Dense { input: usize, output: usize },
    Conv2d { in_ch: usize, out_ch: usize, kernel: usize, stride: usize, pad: usize },
    ConvTranspose2d { in_ch: usize, out_ch: usize, kernel: usize, stride: usize, pad: usize },
    /// Stride 1, "same" padding. The last `cond_ch` input channels are
    /// conditioning planes and keep their centre tap under either mask.
    MaskedConv2d {
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        mask: MaskType,
        #[serde(default)]
        cond_ch: usize,
    },
    Activation(Activation),
    Flatten,
    Reshape { shape: Vec<usize> },
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::ConvTranspose2d { .. } => "conv_transpose2d",
            LayerSpec::MaskedConv2d { .. } => "masked_conv2d",
            LayerSpec::Activation(_) => "activation",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Reshape { .. } => "reshape",
        }
    }

    pub fn param_count(&self) -> usize {
        match *self {
            LayerSpec::Dense { input, output } => input * output + output,
            LayerSpec::Conv2d { in_ch, out_ch, kernel, .. }
            | LayerSpec::MaskedConv2d { in_ch, out_ch, kernel, .. }
            | LayerSpec::ConvTranspose2d { in_ch, out_ch, kernel, .. } => in_ch * out_ch * kernel * kernel + out_ch,
            _ => 0,
        }
    }

    /// Number of weights before the bias block.
    pub fn weight_count(&self) -> usize {
        let out = match *self {
            LayerSpec::Dense { output, .. } => output,
            LayerSpec::Conv2d { out_ch, .. }
            | LayerSpec::MaskedConv2d { out_ch, .. }
            | LayerSpec::ConvTranspose2d { out_ch, .. } => out_ch,
            _ => 0,
        };
        self.param_count() - out
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Dense { input, .. } => input,
            LayerSpec::Conv2d { in_ch, kernel, .. } | LayerSpec::ConvTranspose2d { in_ch, kernel, .. } => {
                in_ch * kernel * kernel
            }
            LayerSpec::MaskedConv2d { in_ch, kernel, mask, .. } => in_ch * mask_taps(kernel, mask).max(1),
            _ => 0,
        }
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn output_shape(&self, index: usize, input: &[usize]) -> Result<Vec<usize>> {
        let err = |message: String| NnError::Shape { layer: index, kind: self.kind(), message };
        match self {
            LayerSpec::Dense { input: n_in, output } => {
                if input != [*n_in] {
                    return Err(err(format!("expects [{n_in}], got {input:?}")));
                }
                Ok(vec![*output])
            }
            LayerSpec::Conv2d { in_ch, out_ch, kernel, stride, pad } => {
                let g = plane_geom(input, *in_ch, *kernel, *stride, *pad).ok_or_else(|| {
                    err(format!("expects [{in_ch}, h, w] with h, w + 2*pad >= kernel, got {input:?}"))
                })?;
                if *stride == 0 {
                    return Err(err("stride must be positive".into()));
                }
                Ok(vec![*out_ch, g.out_height(), g.out_width()])
            }
            LayerSpec::ConvTranspose2d { in_ch, out_ch, kernel, stride, pad } => {
                if input.len() != 3 || input[0] != *in_ch || *stride == 0 {
                    return Err(err(format!("expects [{in_ch}, h, w], got {input:?}")));
                }
                let grow = |n: usize| ((n - 1) * stride + kernel).checked_sub(2 * pad);
                match (grow(input[1]), grow(input[2])) {
                    (Some(h), Some(w)) if h > 0 && w > 0 => Ok(vec![*out_ch, h, w]),
                    _ => Err(err("padding exceeds output extent".into())),
                }
            }
            LayerSpec::MaskedConv2d { in_ch, out_ch, kernel, .. } => {
                if kernel % 2 == 0 {
                    return Err(err("masked convolution needs an odd kernel".into()));
                }
                plane_geom(input, *in_ch, *kernel, 1, kernel / 2)
                    .ok_or_else(|| err(format!("expects [{in_ch}, h, w], got {input:?}")))?;
                Ok(vec![*out_ch, input[1], input[2]])
            }
            LayerSpec::Activation(_) => Ok(input.to_vec()),
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
            LayerSpec::Reshape { shape } => {
                if shape.iter().product::<usize>() != input.iter().product::<usize>() {
                    return Err(err(format!("cannot reshape {input:?} into {shape:?}")));
                }
                Ok(shape.clone())
            }
        }
    }
}

fn plane_geom(input: &[usize], in_ch: usize, kernel: usize, stride: usize, pad: usize) -> Option<ConvGeom> {
    if input.len() != 3 || input[0] != in_ch || stride == 0 {
        return None;
    }
    if input[1] + 2 * pad < kernel || input[2] + 2 * pad < kernel {
        return None;
    }
    Some(ConvGeom { channels: in_ch, height: input[1], width: input[2], kernel, stride, pad })
}

/// Whether kernel tap `(ky, kx)` is visible under `mask`.
pub fn mask_allows(kernel: usize, mask: MaskType, ky: usize, kx: usize) -> bool {
    let c = kernel / 2;
    ky < c || (ky == c && (kx < c || (kx == c && mask == MaskType::B)))
}

fn mask_taps(kernel: usize, mask: MaskType) -> usize {
    (0..kernel).flat_map(|ky| (0..kernel).map(move |kx| (ky, kx))).filter(|&(y, x)| mask_allows(kernel, mask, y, x)).count()
}

/// Multiplicative mask over a masked-conv weight block.
pub fn weight_mask(in_ch: usize, out_ch: usize, kernel: usize, mask: MaskType, cond_ch: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(in_ch * out_ch * kernel * kernel);
    for _ in 0..out_ch {
        for ic in 0..in_ch {
            let plane_mask = if ic + cond_ch >= in_ch { MaskType::B } else { mask };
            for ky in 0..kernel {
                for kx in 0..kernel {
                    m.push(if mask_allows(kernel, plane_mask, ky, kx) { 1.0 } else { 0.0 });
                }
            }
        }
    }
    m
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn activate(act: Activation, x: &[f64], y: &mut [f64]) {
    for (o, &v) in y.iter_mut().zip(x) {
        *o = match act {
            Activation::Relu => v.max(0.0),
            Activation::LeakyRelu => {
                if v > 0.0 {
                    v
                } else {
                    LEAKY_SLOPE * v
                }
            }
            Activation::Sigmoid => sigmoid(v),
            Activation::Tanh => v.tanh(),
        };
    }
}

pub fn activate_backward(act: Activation, x: &[f64], y: &[f64], dy: &[f64], dx: &mut [f64]) {
    for i in 0..dx.len() {
        let g = match act {
            Activation::Relu => {
                if x[i] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if x[i] > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Sigmoid => y[i] * (1.0 - y[i]),
            Activation::Tanh => 1.0 - y[i] * y[i],
        };
        dx[i] = dy[i] * g;
    }
}

pub fn dense_forward(input: usize, output: usize, params: &[f64], x: &[f64], batch: usize, y: &mut [f64]) {
    let (w, b) = params.split_at(input * output);
    for row in y.chunks_exact_mut(output) {
        row.copy_from_slice(b);
    }
    gemm(batch, input, output, x, false, w, true, y, 1.0);
}

#[allow(clippy::too_many_arguments)]
pub fn dense_backward(
    input: usize,
    output: usize,
    params: &[f64],
    x: &[f64],
    batch: usize,
    dy: &[f64],
    dx: &mut [f64],
    grads: Option<&mut [f64]>,
) {
    let w = &params[..input * output];
    gemm(batch, output, input, dy, false, w, false, dx, 0.0);
    if let Some(g) = grads {
        let (gw, gb) = g.split_at_mut(input * output);
        gemm(output, batch, input, dy, true, x, false, gw, 1.0);
        for row in dy.chunks_exact(output) {
            for (acc, &v) in gb.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
}

/// Convolution over a batch. `weights` must already be masked for masked
/// convolutions. Returns the per-sample column matrices for reuse in the
/// backward pass.
pub fn conv_forward(g: &ConvGeom, out_ch: usize, weights: &[f64], bias: &[f64], x: &[f64], batch: usize, y: &mut [f64]) -> Vec<f64> {
    let in_len = g.channels * g.height * g.width;
    let (k, p) = (g.patch(), g.positions());
    let mut cols = vec![0.0; batch * k * p];
    for b in 0..batch {
        let c = &mut cols[b * k * p..(b + 1) * k * p];
        im2col(&x[b * in_len..(b + 1) * in_len], g, c);
        let out = &mut y[b * out_ch * p..(b + 1) * out_ch * p];
        for (oc, plane) in out.chunks_exact_mut(p).enumerate() {
            plane.fill(bias[oc]);
        }
        gemm(out_ch, k, p, weights, false, c, false, out, 1.0);
    }
    cols
}

#[allow(clippy::too_many_arguments)]
pub fn conv_backward(
    g: &ConvGeom,
    out_ch: usize,
    weights: &[f64],
    cols: &[f64],
    batch: usize,
    dy: &[f64],
    dx: &mut [f64],
    grads: Option<(&mut [f64], &mut [f64])>,
) {
    let in_len = g.channels * g.height * g.width;
    let (k, p) = (g.patch(), g.positions());
    let mut dcols = vec![0.0; k * p];
    let mut grads = grads;
    dx.fill(0.0);
    for b in 0..batch {
        let d = &dy[b * out_ch * p..(b + 1) * out_ch * p];
        gemm(k, out_ch, p, weights, true, d, false, &mut dcols, 0.0);
        col2im(&dcols, g, &mut dx[b * in_len..(b + 1) * in_len]);
        if let Some((gw, gb)) = grads.as_mut() {
            gemm(out_ch, p, k, d, false, &cols[b * k * p..(b + 1) * k * p], true, gw, 1.0);
            for (oc, plane) in d.chunks_exact(p).enumerate() {
                gb[oc] += plane.iter().sum::<f64>();
            }
        }
    }
}

/// Transposed convolution. `g` describes the equivalent forward convolution
/// whose *input* is this layer's output (`g.channels == out_ch`).
pub fn conv_transpose_forward(g: &ConvGeom, in_ch: usize, weights: &[f64], bias: &[f64], x: &[f64], batch: usize, y: &mut [f64]) {
    let out_len = g.channels * g.height * g.width;
    let (k, p) = (g.patch(), g.positions());
    let plane = g.height * g.width;
    let mut cols = vec![0.0; k * p];
    for b in 0..batch {
        gemm(k, in_ch, p, weights, true, &x[b * in_ch * p..(b + 1) * in_ch * p], false, &mut cols, 0.0);
        let out = &mut y[b * out_len..(b + 1) * out_len];
        for (oc, chunk) in out.chunks_exact_mut(plane).enumerate() {
            chunk.fill(bias[oc]);
        }
        col2im(&cols, g, out);
    }
}

#[allow(clippy::too_many_arguments)]
pub fn conv_transpose_backward(
    g: &ConvGeom,
    in_ch: usize,
    weights: &[f64],
    x: &[f64],
    batch: usize,
    dy: &[f64],
    dx: &mut [f64],
    grads: Option<(&mut [f64], &mut [f64])>,
) {
    let out_len = g.channels * g.height * g.width;
    let (k, p) = (g.patch(), g.positions());
    let plane = g.height * g.width;
    let mut dcols = vec![0.0; k * p];
    let mut grads = grads;
    for b in 0..batch {
        let d = &dy[b * out_len..(b + 1) * out_len];
        im2col(d, g, &mut dcols);
        gemm(in_ch, k, p, weights, false, &dcols, false, &mut dx[b * in_ch * p..(b + 1) * in_ch * p], 0.0);
        if let Some((gw, gb)) = grads.as_mut() {
            gemm(in_ch, p, k, &x[b * in_ch * p..(b + 1) * in_ch * p], false, &dcols, true, gw, 1.0);
            for (oc, chunk) in d.chunks_exact(plane).enumerate() {
                gb[oc] += chunk.iter().sum::<f64>();
            }
        }
    }
}

pub(crate) fn conv_geom(spec: &LayerSpec, input: &[usize], output: &[usize]) -> Option<ConvGeom> {
    match *spec {
        LayerSpec::Conv2d { in_ch, kernel, stride, pad, .. } => {
            Some(ConvGeom { channels: in_ch, height: input[1], width: input[2], kernel, stride, pad })
        }
        LayerSpec::MaskedConv2d { in_ch, kernel, .. } => {
            Some(ConvGeom { channels: in_ch, height: input[1], width: input[2], kernel, stride: 1, pad: kernel / 2 })
        }
        LayerSpec::ConvTranspose2d { out_ch, kernel, stride, pad, .. } => {
            Some(ConvGeom { channels: out_ch, height: output[1], width: output[2], kernel, stride, pad })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_output_size_formula() {
        for (n, k, s, p) in [(28, 4, 2, 1), (14, 4, 2, 1), (7, 3, 1, 1), (5, 3, 2, 0), (9, 5, 3, 2)] {
            let spec = LayerSpec::Conv2d { in_ch: 1, out_ch: 1, kernel: k, stride: s, pad: p };
            let out = spec.output_shape(0, &[1, n, n]).unwrap();
            assert_eq!(out[1], (n + 2 * p - k) / s + 1);
        }
    }

    #[test]
    fn transpose_inverts_conv_size() {
        let t = LayerSpec::ConvTranspose2d { in_ch: 4, out_ch: 2, kernel: 4, stride: 2, pad: 1 };
        assert_eq!(t.output_shape(0, &[4, 7, 7]).unwrap(), vec![2, 14, 14]);
        assert_eq!(t.output_shape(0, &[4, 14, 14]).unwrap(), vec![2, 28, 28]);
    }

    #[test]
    fn mask_types() {
        // 3x3: A sees taps (0,*) and (1,0); B also sees the centre.
        let a: Vec<bool> = (0..9).map(|t| mask_allows(3, MaskType::A, t / 3, t % 3)).collect();
        assert_eq!(a, [true, true, true, true, false, false, false, false, false]);
        assert!(mask_allows(3, MaskType::B, 1, 1));
        assert!(!mask_allows(3, MaskType::B, 1, 2));
    }

    #[test]
    fn shape_errors_name_layer() {
        let spec = LayerSpec::Dense { input: 3, output: 2 };
        match spec.output_shape(4, &[5]) {
            Err(NnError::Shape { layer: 4, kind: "dense", .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}

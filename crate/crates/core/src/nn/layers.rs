//! Forward and backward passes for the individual layers.
//!
//! Convolution is "valid" (no padding) with stride 1, so a k×k kernel maps
//! an H×W plane to (H−k+1)×(W−k+1). Pooling windows are non-overlapping
//! (stride = window) and ties inside a window resolve to the first cell in
//! row-major order, which keeps the backward routing deterministic.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// 2-D convolution layer: kernels `[out_ch, in_ch, k, k]` plus one bias per
/// output channel. Valid padding, stride 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T: Scalar> {
    pub kernels: Tensor<T>,
    pub bias: Tensor<T>,
    pub stride: usize,
}

impl<T: Scalar> ConvLayer<T> {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel_size: usize) -> Self {
        ConvLayer {
            kernels: Tensor::zeros(&[out_channels, in_channels, kernel_size, kernel_size]),
            bias: Tensor::zeros(&[out_channels]),
            stride: 1,
        }
    }

    /// Glorot-uniform initialized kernels, zero bias.
    pub fn glorot<R: Rng>(
        out_channels: usize,
        in_channels: usize,
        kernel_size: usize,
        rng: &mut R,
    ) -> Self {
        let mut layer = Self::zeros(out_channels, in_channels, kernel_size);
        let fan_in = in_channels * kernel_size * kernel_size;
        let fan_out = out_channels * kernel_size * kernel_size;
        glorot_fill(layer.kernels.values_mut(), fan_in, fan_out, rng);
        layer
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[1]
    }

    pub fn kernel_size(&self) -> usize {
        self.kernels.shape()[2]
    }
}

/// Non-overlapping max-pool: `window` × `window` cells, stride = window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolLayer {
    pub window: usize,
}

impl PoolLayer {
    pub fn new(window: usize) -> Self {
        PoolLayer { window }
    }
}

impl Default for PoolLayer {
    fn default() -> Self {
        PoolLayer { window: 2 }
    }
}

/// Fully connected layer: `weights [out, in]`, `bias [out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T: Scalar> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        DenseLayer {
            weights: Tensor::zeros(&[out_dim, in_dim]),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn glorot<R: Rng>(out_dim: usize, in_dim: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(out_dim, in_dim);
        glorot_fill(layer.weights.values_mut(), in_dim, out_dim, rng);
        layer
    }

    pub fn out_dim(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape()[1]
    }
}

/// Uniform init in ±sqrt(6/(fan_in+fan_out)).
fn glorot_fill<T: Scalar, R: Rng>(values: &mut [T], fan_in: usize, fan_out: usize, rng: &mut R) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in values.iter_mut() {
        // Draw in f64 so f32 and f64 models see the same sequence.
        *v = T::from(rng.gen_range(-limit..limit)).expect("f64 fits element type");
    }
}

/// Argmax record from a pooling forward pass; needed to route gradients back.
#[derive(Debug, Clone)]
pub struct MaxPoolMask {
    input_shape: [usize; 3],
    output_shape: [usize; 3],
    /// Flat index into the input values for every output cell.
    indices: Vec<usize>,
}

impl MaxPoolMask {
    pub fn output_shape(&self) -> [usize; 3] {
        self.output_shape
    }
}

fn dims3<T: Scalar>(t: &Tensor<T>) -> Result<(usize, usize, usize)> {
    match t.shape() {
        [c, h, w] => Ok((*c, *h, *w)),
        other => Err(Error::Shape(format!("expected rank-3 tensor, got {other:?}"))),
    }
}

/// out[o][y][x] = bias[o] + Σ_{i,dy,dx} input[i][y+dy][x+dx] · kernels[o][i][dy][dx]
pub fn conv2d_forward<T: Scalar>(input: &Tensor<T>, layer: &ConvLayer<T>) -> Result<Tensor<T>> {
    let (in_ch, h, w) = dims3(input)?;
    let k = layer.kernel_size();
    if in_ch != layer.in_channels() {
        return Err(Error::Shape(format!(
            "conv expects {} input channels, got {in_ch}",
            layer.in_channels()
        )));
    }
    if h < k || w < k {
        return Err(Error::Shape(format!(
            "conv input {h}x{w} smaller than {k}x{k} kernel"
        )));
    }
    let out_ch = layer.out_channels();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut out = vec![T::zero(); out_ch * oh * ow];
    let kernels = layer.kernels.values();
    let bias = layer.bias.values();
    let inp = input.values();

    for o in 0..out_ch {
        let out_plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        out_plane.iter_mut().for_each(|v| *v = bias[o]);
        for i in 0..in_ch {
            let in_plane = &inp[i * h * w..(i + 1) * h * w];
            let kbase = (o * in_ch + i) * k * k;
            for dy in 0..k {
                for dx in 0..k {
                    let wgt = kernels[kbase + dy * k + dx];
                    for y in 0..oh {
                        let row = (y + dy) * w + dx;
                        let in_row = &in_plane[row..row + ow];
                        let out_row = &mut out_plane[y * ow..y * ow + ow];
                        for (a, &v) in out_row.iter_mut().zip(in_row) {
                            *a += wgt * v;
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[out_ch, oh, ow], out)
}

/// Gradients of [`conv2d_forward`] with respect to input, kernels and bias.
pub fn conv2d_backward<T: Scalar>(
    layer: &ConvLayer<T>,
    input: &Tensor<T>,
    upstream: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (in_ch, h, w) = dims3(input)?;
    let (g_ch, oh, ow) = dims3(upstream)?;
    let k = layer.kernel_size();
    let out_ch = layer.out_channels();
    if in_ch != layer.in_channels() || g_ch != out_ch {
        return Err(Error::Shape("conv backward channel mismatch".into()));
    }
    if h < k || oh != h - k + 1 || ow != w - k + 1 {
        return Err(Error::Shape(format!(
            "upstream {oh}x{ow} inconsistent with input {h}x{w} and kernel {k}"
        )));
    }

    let mut input_grad = vec![T::zero(); in_ch * h * w];
    let mut kernel_grad = vec![T::zero(); out_ch * in_ch * k * k];
    let mut bias_grad = vec![T::zero(); out_ch];
    let kernels = layer.kernels.values();
    let inp = input.values();
    let up = upstream.values();

    for o in 0..out_ch {
        let g_plane = &up[o * oh * ow..(o + 1) * oh * ow];
        bias_grad[o] = g_plane.iter().copied().sum();
        for i in 0..in_ch {
            let in_plane = &inp[i * h * w..(i + 1) * h * w];
            let ig_plane = &mut input_grad[i * h * w..(i + 1) * h * w];
            let kbase = (o * in_ch + i) * k * k;
            for dy in 0..k {
                for dx in 0..k {
                    let wgt = kernels[kbase + dy * k + dx];
                    let mut kg = T::zero();
                    for y in 0..oh {
                        let row = (y + dy) * w + dx;
                        let g_row = &g_plane[y * ow..y * ow + ow];
                        let in_row = &in_plane[row..row + ow];
                        let ig_row = &mut ig_plane[row..row + ow];
                        for ((ig, &g), &v) in ig_row.iter_mut().zip(g_row).zip(in_row) {
                            *ig += wgt * g;
                            kg += g * v;
                        }
                    }
                    kernel_grad[kbase + dy * k + dx] = kg;
                }
            }
        }
    }

    Ok((
        Tensor::from_vec(&[in_ch, h, w], input_grad)?,
        Tensor::from_vec(&[out_ch, in_ch, k, k], kernel_grad)?,
        Tensor::from_vec(&[out_ch], bias_grad)?,
    ))
}

/// Max over each window; the mask records the winning input index per cell.
pub fn maxpool_forward<T: Scalar>(
    input: &Tensor<T>,
    layer: &PoolLayer,
) -> Result<(Tensor<T>, MaxPoolMask)> {
    let (ch, h, w) = dims3(input)?;
    let win = layer.window;
    if win == 0 || h < win || w < win {
        return Err(Error::Shape(format!(
            "pool window {win} does not fit input {h}x{w}"
        )));
    }
    let (oh, ow) = (h / win, w / win);
    let mut out = vec![T::zero(); ch * oh * ow];
    let mut indices = vec![0usize; ch * oh * ow];
    let inp = input.values();

    for c in 0..ch {
        let plane = c * h * w;
        for y in 0..oh {
            for x in 0..ow {
                let mut best = T::neg_infinity();
                let mut best_idx = 0usize;
                for dy in 0..win {
                    let row = plane + (y * win + dy) * w + x * win;
                    for dx in 0..win {
                        let v = inp[row + dx];
                        // strict > keeps the first cell on ties
                        if v > best {
                            best = v;
                            best_idx = row + dx;
                        }
                    }
                }
                let oi = c * oh * ow + y * ow + x;
                out[oi] = best;
                indices[oi] = best_idx;
            }
        }
    }

    let mask = MaxPoolMask {
        input_shape: [ch, h, w],
        output_shape: [ch, oh, ow],
        indices,
    };
    Ok((Tensor::from_vec(&[ch, oh, ow], out)?, mask))
}

/// Routes upstream gradient to the argmax positions, zero elsewhere.
pub fn maxpool_backward<T: Scalar>(mask: &MaxPoolMask, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    if upstream.shape() != mask.output_shape {
        return Err(Error::Shape(format!(
            "upstream shape {:?} does not match pooled shape {:?}",
            upstream.shape(),
            mask.output_shape
        )));
    }
    let [ch, h, w] = mask.input_shape;
    let mut grad = vec![T::zero(); ch * h * w];
    for (&idx, &g) in mask.indices.iter().zip(upstream.values()) {
        grad[idx] += g;
    }
    Tensor::from_vec(&[ch, h, w], grad)
}

/// Elementwise max(0, x).
pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = input.clone();
    out.values_mut().iter_mut().for_each(|v| {
        if *v < T::zero() {
            *v = T::zero();
        }
    });
    out
}

/// Passes upstream where the forward input was > 0, zero where ≤ 0.
pub fn relu_backward<T: Scalar>(input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    if input.shape() != upstream.shape() {
        return Err(Error::Shape("relu backward shape mismatch".into()));
    }
    let mut grad = upstream.clone();
    for (g, &x) in grad.values_mut().iter_mut().zip(input.values()) {
        if x <= T::zero() {
            *g = T::zero();
        }
    }
    Ok(grad)
}

/// Row-major linearization of a [ch, H, W] block into a vector.
pub fn flatten<T: Scalar>(input: &Tensor<T>) -> Result<Tensor<T>> {
    let (c, h, w) = dims3(input)?;
    input.clone().reshaped(&[c * h * w])
}

/// Inverse of [`flatten`]; the backward pass of the flatten layer.
pub fn unflatten<T: Scalar>(grad: &Tensor<T>, shape: [usize; 3]) -> Result<Tensor<T>> {
    grad.clone().reshaped(&[shape[0], shape[1], shape[2]])
}

/// out = W·x + b
pub fn dense_forward<T: Scalar>(input: &Tensor<T>, layer: &DenseLayer<T>) -> Result<Tensor<T>> {
    let (out_dim, in_dim) = (layer.out_dim(), layer.in_dim());
    if input.len() != in_dim {
        return Err(Error::Shape(format!(
            "dense expects input of {in_dim}, got {}",
            input.len()
        )));
    }
    let x = input.values();
    let weights = layer.weights.values();
    let mut out = layer.bias.values().to_vec();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &weights[j * in_dim..(j + 1) * in_dim];
        *o += row.iter().zip(x).map(|(&w, &v)| w * v).sum::<T>();
    }
    Tensor::from_vec(&[out_dim], out)
}

/// dL/dx = Wᵀ·g, dL/dW = g·xᵀ, dL/db = g
pub fn dense_backward<T: Scalar>(
    layer: &DenseLayer<T>,
    input: &Tensor<T>,
    upstream: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (out_dim, in_dim) = (layer.out_dim(), layer.in_dim());
    if input.len() != in_dim || upstream.len() != out_dim {
        return Err(Error::Shape("dense backward shape mismatch".into()));
    }
    let x = input.values();
    let g = upstream.values();
    let weights = layer.weights.values();

    let mut input_grad = vec![T::zero(); in_dim];
    let mut weight_grad = vec![T::zero(); out_dim * in_dim];
    for j in 0..out_dim {
        let gj = g[j];
        let w_row = &weights[j * in_dim..(j + 1) * in_dim];
        let wg_row = &mut weight_grad[j * in_dim..(j + 1) * in_dim];
        for i in 0..in_dim {
            input_grad[i] += w_row[i] * gj;
            wg_row[i] = gj * x[i];
        }
    }

    Ok((
        Tensor::from_vec(&[in_dim], input_grad)?,
        Tensor::from_vec(&[out_dim, in_dim], weight_grad)?,
        Tensor::from_vec(&[out_dim], g.to_vec())?,
    ))
}

/// Max-shifted softmax with cross-entropy loss against a class index.
/// Returns (loss, probabilities, gradient at the logits).
pub fn softmax_cross_entropy<T: Scalar>(
    logits: &Tensor<T>,
    target: usize,
) -> Result<(T, Tensor<T>, Tensor<T>)> {
    let n = logits.len();
    if target >= n {
        return Err(Error::InvalidClass {
            class: target,
            n_classes: n,
        });
    }
    let z = logits.values();
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut probs: Vec<T> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: T = probs.iter().copied().sum();
    probs.iter_mut().for_each(|p| *p /= sum);
    let loss = -probs[target].ln();
    let mut grad = probs.clone();
    grad[target] -= T::one();
    Ok((
        loss,
        Tensor::from_vec(&[n], probs)?,
        Tensor::from_vec(&[n], grad)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3(c: usize, h: usize, w: usize, v: Vec<f64>) -> Tensor<f64> {
        Tensor::from_vec(&[c, h, w], v).unwrap()
    }

    #[test]
    fn conv_identity_kernel_passes_input_through() {
        let input = t3(1, 3, 3, vec![1.0; 9]);
        let mut layer = ConvLayer::<f64>::zeros(1, 1, 1);
        layer.kernels.values_mut()[0] = 1.0;
        let out = conv2d_forward(&input, &layer).unwrap();
        assert_eq!(out.shape(), &[1, 3, 3]);
        assert_eq!(out.values(), input.values());
    }

    #[test]
    fn conv_210_input_11_kernel_gives_200_output() {
        let input = Tensor::<f32>::zeros(&[1, 210, 210]);
        let layer = ConvLayer::<f32>::zeros(16, 1, 11);
        let out = conv2d_forward(&input, &layer).unwrap();
        assert_eq!(out.shape(), &[16, 200, 200]);
    }

    #[test]
    fn conv_hand_dot_product() {
        // 2x2 input [[1,2],[3,4]], kernel [[1,0],[0,1]], bias 1 -> 1 + 4 + 1 = 6
        let input = t3(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let mut layer = ConvLayer::<f64>::zeros(1, 1, 2);
        layer.kernels.values_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        layer.bias.values_mut()[0] = 1.0;
        let out = conv2d_forward(&input, &layer).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1]);
        assert_eq!(out.values(), &[6.0]);
    }

    #[test]
    fn conv_rejects_channel_mismatch() {
        let input = t3(2, 3, 3, vec![0.0; 18]);
        let layer = ConvLayer::<f64>::zeros(1, 1, 2);
        assert!(matches!(
            conv2d_forward(&input, &layer),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn conv_backward_zero_upstream_gives_zero_grads() {
        let input = t3(1, 4, 4, (0..16).map(|i| i as f64).collect());
        let layer = ConvLayer::<f64>::glorot(2, 1, 3, &mut crate::test_rng(7));
        let upstream = Tensor::<f64>::zeros(&[2, 2, 2]);
        let (gi, gk, gb) = conv2d_backward(&layer, &input, &upstream).unwrap();
        assert!(gi.values().iter().all(|&v| v == 0.0));
        assert!(gk.values().iter().all(|&v| v == 0.0));
        assert!(gb.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_backward_identity_kernel_routes_upstream() {
        let input = t3(1, 3, 3, (0..9).map(|i| i as f64).collect());
        let mut layer = ConvLayer::<f64>::zeros(1, 1, 1);
        layer.kernels.values_mut()[0] = 1.0;
        let upstream = t3(1, 3, 3, (0..9).map(|i| (i * i) as f64).collect());
        let (gi, _, _) = conv2d_backward(&layer, &input, &upstream).unwrap();
        assert_eq!(gi.values(), upstream.values());
    }

    #[test]
    fn conv_is_linear_in_input_modulo_bias() {
        let mut rng = crate::test_rng(11);
        let layer = ConvLayer::<f64>::glorot(2, 1, 3, &mut rng);
        let x = t3(1, 5, 5, (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let y = t3(1, 5, 5, (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let (a, b) = (0.7, -1.3);
        let combo = t3(
            1,
            5,
            5,
            x.values()
                .iter()
                .zip(y.values())
                .map(|(&xv, &yv)| a * xv + b * yv)
                .collect(),
        );
        let fx = conv2d_forward(&x, &layer).unwrap();
        let fy = conv2d_forward(&y, &layer).unwrap();
        let fc = conv2d_forward(&combo, &layer).unwrap();
        // bias enters each evaluation once: f(ax+by) = a f(x) + b f(y) + (1-a-b) bias
        for (i, &v) in fc.values().iter().enumerate() {
            let o = i / (3 * 3);
            let expect =
                a * fx.values()[i] + b * fy.values()[i] + (1.0 - a - b) * layer.bias.values()[o];
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn maxpool_takes_window_max() {
        let input = t3(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let (out, _) = maxpool_forward(&input, &PoolLayer::new(2)).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1]);
        assert_eq!(out.values(), &[4.0]);
    }

    #[test]
    fn maxpool_tie_breaks_to_first_in_row_major() {
        let input = t3(1, 2, 2, vec![5.0; 4]);
        let (out, mask) = maxpool_forward(&input, &PoolLayer::new(2)).unwrap();
        assert_eq!(out.values(), &[5.0]);
        assert_eq!(mask.indices, vec![0]);
    }

    #[test]
    fn maxpool_16x44x44_yields_7744_values() {
        let input = Tensor::<f32>::zeros(&[16, 44, 44]);
        let (out, _) = maxpool_forward(&input, &PoolLayer::new(2)).unwrap();
        assert_eq!(out.shape(), &[16, 22, 22]);
        assert_eq!(out.len(), 7744);
    }

    #[test]
    fn maxpool_backward_routes_and_conserves_mass() {
        let mut rng = crate::test_rng(3);
        let input = t3(1, 4, 4, (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let (_, mask) = maxpool_forward(&input, &PoolLayer::new(2)).unwrap();
        let ones = Tensor::from_vec(&[1, 2, 2], vec![1.0; 4]).unwrap();
        let grad = maxpool_backward(&mask, &ones).unwrap();
        let total: f64 = grad.values().iter().sum();
        assert_eq!(total, 4.0); // one unit per output cell
        let zero = Tensor::<f64>::zeros(&[1, 2, 2]);
        let zgrad = maxpool_backward(&mask, &zero).unwrap();
        assert!(zgrad.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn relu_clamps_negatives() {
        let input = Tensor::from_vec(&[3], vec![-1.0, 0.0, 2.0]).unwrap();
        let out = relu(&input);
        assert_eq!(out.values(), &[0.0, 0.0, 2.0]);
        // nonnegative input is untouched
        let pos = Tensor::from_vec(&[3], vec![0.5, 0.0, 7.0]).unwrap();
        assert_eq!(relu(&pos).values(), pos.values());
    }

    #[test]
    fn flatten_roundtrip_is_identity() {
        let input = t3(2, 2, 3, (0..12).map(|i| i as f64).collect());
        let flat = flatten(&input).unwrap();
        assert_eq!(flat.shape(), &[12]);
        let back = unflatten(&flat, [2, 2, 3]).unwrap();
        assert_eq!(back, input);

        let one = t3(1, 1, 1, vec![9.0]);
        assert_eq!(flatten(&one).unwrap().shape(), &[1]);
    }

    #[test]
    fn dense_identity_and_hand_case() {
        let mut layer = DenseLayer::<f64>::zeros(2, 2);
        layer.weights.values_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        let x = Tensor::from_vec(&[2], vec![3.0, -4.0]).unwrap();
        assert_eq!(dense_forward(&x, &layer).unwrap().values(), x.values());

        // W=[[1,1]], b=[1], x=[2,3] -> [6]
        let mut layer = DenseLayer::<f64>::zeros(1, 2);
        layer.weights.values_mut().copy_from_slice(&[1.0, 1.0]);
        layer.bias.values_mut()[0] = 1.0;
        let x = Tensor::from_vec(&[2], vec![2.0, 3.0]).unwrap();
        assert_eq!(dense_forward(&x, &layer).unwrap().values(), &[6.0]);
    }

    #[test]
    fn softmax_uniform_on_equal_logits() {
        let logits = Tensor::<f64>::from_vec(&[3], vec![0.0, 0.0, 0.0]).unwrap();
        let (loss, probs, _) = softmax_cross_entropy(&logits, 0).unwrap();
        for &p in probs.values() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((loss - 3.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn softmax_is_stable_under_large_logits() {
        let logits = Tensor::<f64>::from_vec(&[2], vec![1000.0, 0.0]).unwrap();
        let (loss, probs, grad) = softmax_cross_entropy(&logits, 0).unwrap();
        assert!(loss.abs() < 1e-12);
        assert!(probs.all_finite() && grad.all_finite());
    }

    #[test]
    fn softmax_rejects_out_of_range_target() {
        let logits = Tensor::<f64>::from_vec(&[3], vec![0.0; 3]).unwrap();
        assert!(matches!(
            softmax_cross_entropy(&logits, 3),
            Err(Error::InvalidClass { class: 3, n_classes: 3 })
        ));
    }
}

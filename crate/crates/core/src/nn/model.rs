//! 1D-CNN: conv -> ReLU -> max-pool -> conv -> ReLU -> max-pool -> dense
//! (ReLU) -> softmax.
//!
//! Activations are kept channels-last, `(batch, time, channels)`, so the
//! receptive field of output step `t` is the contiguous slice
//! `x[t..t + k, :]`. Convolutions run as one GEMM per sample over an
//! overlapping read-only view of that slice; no im2col copy is made.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Array3, ArrayView2, Axis, ShapeBuilder};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchConfig {
    pub input_len: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub pool1: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub pool2: usize,
    pub dense_units: usize,
    pub n_classes: usize,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            input_len: crate::types::FUSED_COLS,
            conv1_filters: 32,
            conv1_kernel: 5,
            pool1: 2,
            conv2_filters: 64,
            conv2_kernel: 5,
            pool2: 2,
            dense_units: 128,
            n_classes: crate::label::N_CLASSES,
        }
    }
}

impl ArchConfig {
    fn lengths(&self) -> Option<[usize; 4]> {
        let c1 = self.input_len.checked_sub(self.conv1_kernel)? + 1;
        let p1 = c1 / self.pool1;
        let c2 = p1.checked_sub(self.conv2_kernel)? + 1;
        let p2 = c2 / self.pool2;
        Some([c1, p1, c2, p2])
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.input_len,
            self.conv1_filters,
            self.conv1_kernel,
            self.pool1,
            self.conv2_filters,
            self.conv2_kernel,
            self.pool2,
            self.dense_units,
            self.n_classes,
        ];
        if fields.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "architecture sizes must all be >= 1: {self:?}"
            )));
        }
        match self.lengths() {
            Some([_, p1, _, p2]) if p1 > 0 && p2 > 0 => Ok(()),
            _ => Err(Error::InvalidConfig(format!(
                "input length {} is too short for the conv/pool stack",
                self.input_len
            ))),
        }
    }

    /// `[conv1, pool1, conv2, pool2]` output lengths.
    pub fn stage_lengths(&self) -> [usize; 4] {
        self.lengths().expect("validated architecture")
    }

    pub fn flat_len(&self) -> usize {
        self.stage_lengths()[3] * self.conv2_filters
    }
}

/// Kernels are stored `(out_ch, in_ch, k)`; stride 1, no padding.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dLayer {
    pub kernels: Array3<f64>,
    pub bias: Array1<f64>,
}

impl Conv1dLayer {
    pub fn zeros(out_ch: usize, in_ch: usize, k: usize) -> Self {
        Conv1dLayer {
            kernels: Array3::zeros((out_ch, in_ch, k)),
            bias: Array1::zeros(out_ch),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.dim().0
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.dim().1
    }

    pub fn kernel_len(&self) -> usize {
        self.kernels.dim().2
    }

    /// `(k * in_ch, out_ch)` matrix with row index `j * in_ch + c`.
    fn gemm_weights(&self) -> Array2<f64> {
        let (o, i, k) = self.kernels.dim();
        Array2::from_shape_fn((k * i, o), |(r, f)| self.kernels[[f, r % i, r / i]])
    }

    fn add_gemm_grad(&mut self, g: &Array2<f64>) {
        let (o, i, k) = self.kernels.dim();
        for f in 0..o {
            for c in 0..i {
                for j in 0..k {
                    self.kernels[[f, c, j]] += g[[j * i + c, f]];
                }
            }
        }
    }
}

/// `y = W x + b` with `W` stored `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros(out: usize, inp: usize) -> Self {
        DenseLayer {
            weights: Array2::zeros((out, inp)),
            bias: Array1::zeros(out),
        }
    }
}

/// One tensor of every layer. Used for parameters, gradients and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Layers {
    pub conv1: Conv1dLayer,
    pub conv2: Conv1dLayer,
    pub dense: DenseLayer,
    pub output: DenseLayer,
}

pub const TENSOR_NAMES: [&str; 8] = [
    "conv1.kernels",
    "conv1.bias",
    "conv2.kernels",
    "conv2.bias",
    "dense.weights",
    "dense.bias",
    "output.weights",
    "output.bias",
];

impl Layers {
    pub fn zeros(arch: &ArchConfig) -> Self {
        Layers {
            conv1: Conv1dLayer::zeros(arch.conv1_filters, 1, arch.conv1_kernel),
            conv2: Conv1dLayer::zeros(arch.conv2_filters, arch.conv1_filters, arch.conv2_kernel),
            dense: DenseLayer::zeros(arch.dense_units, arch.flat_len()),
            output: DenseLayer::zeros(arch.n_classes, arch.dense_units),
        }
    }

    pub fn shapes(&self) -> [Vec<usize>; 8] {
        [
            self.conv1.kernels.shape().to_vec(),
            self.conv1.bias.shape().to_vec(),
            self.conv2.kernels.shape().to_vec(),
            self.conv2.bias.shape().to_vec(),
            self.dense.weights.shape().to_vec(),
            self.dense.bias.shape().to_vec(),
            self.output.weights.shape().to_vec(),
            self.output.bias.shape().to_vec(),
        ]
    }

    /// Flat views in [`TENSOR_NAMES`] order.
    pub fn tensors(&self) -> [&[f64]; 8] {
        fn s(o: Option<&[f64]>) -> &[f64] {
            o.expect("standard layout")
        }
        [
            s(self.conv1.kernels.as_slice()),
            s(self.conv1.bias.as_slice()),
            s(self.conv2.kernels.as_slice()),
            s(self.conv2.bias.as_slice()),
            s(self.dense.weights.as_slice()),
            s(self.dense.bias.as_slice()),
            s(self.output.weights.as_slice()),
            s(self.output.bias.as_slice()),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 8] {
        fn s(o: Option<&mut [f64]>) -> &mut [f64] {
            o.expect("standard layout")
        }
        [
            s(self.conv1.kernels.as_slice_mut()),
            s(self.conv1.bias.as_slice_mut()),
            s(self.conv2.kernels.as_slice_mut()),
            s(self.conv2.bias.as_slice_mut()),
            s(self.dense.weights.as_slice_mut()),
            s(self.dense.bias.as_slice_mut()),
            s(self.output.weights.as_slice_mut()),
            s(self.output.bias.as_slice_mut()),
        ]
    }

    pub fn same_shapes(&self, other: &Layers) -> bool {
        self.shapes() == other.shapes()
    }

    pub fn fill(&mut self, v: f64) {
        for t in self.tensors_mut() {
            t.fill(v);
        }
    }
}

/// Network weights plus the architecture they realise.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    arch: ArchConfig,
    layers: Layers,
    /// Bumped on every mutation; caches remember the revision they saw.
    revision: u64,
}

pub type Gradients = Layers;

impl ModelParams {
    /// Glorot-uniform weights drawn in tensor order, zero biases.
    pub fn init(arch: ArchConfig, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut layers = Layers::zeros(&arch);
        let mut rng = seeded_rng(seed);
        let k1 = arch.conv1_kernel;
        let k2 = arch.conv2_kernel;
        glorot(layers.conv1.kernels.as_slice_mut().unwrap(), k1, arch.conv1_filters * k1, &mut rng);
        glorot(
            layers.conv2.kernels.as_slice_mut().unwrap(),
            arch.conv1_filters * k2,
            arch.conv2_filters * k2,
            &mut rng,
        );
        glorot(
            layers.dense.weights.as_slice_mut().unwrap(),
            arch.flat_len(),
            arch.dense_units,
            &mut rng,
        );
        glorot(
            layers.output.weights.as_slice_mut().unwrap(),
            arch.dense_units,
            arch.n_classes,
            &mut rng,
        );
        Ok(ModelParams {
            arch,
            layers,
            revision: 0,
        })
    }

    pub fn from_layers(arch: ArchConfig, layers: Layers) -> Result<Self> {
        arch.validate()?;
        if !layers.same_shapes(&Layers::zeros(&arch)) {
            return Err(Error::Shape(format!(
                "layer shapes {:?} do not match architecture {arch:?}",
                layers.shapes()
            )));
        }
        if layers.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(ModelParams {
            arch,
            layers,
            revision: 0,
        })
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    pub fn layers(&self) -> &Layers {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut Layers {
        self.revision += 1;
        &mut self.layers
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn n_params(&self) -> usize {
        self.layers.tensors().iter().map(|t| t.len()).sum()
    }
}

fn glorot(w: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut Rng) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in w {
        *v = rng.gen_range(-limit..limit);
    }
}

/// Activations retained for the backward pass.
///
/// Conv outputs are not kept: after ReLU and max-pool, `pooled > 0` is exactly
/// the ReLU mask at the argmax, which is all the backward pass needs.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    revision: u64,
    arch: ArchConfig,
    input: Array2<f64>,
    pool1: Array3<f64>,
    pool1_arg: Vec<u32>,
    pool2: Array3<f64>,
    pool2_arg: Vec<u32>,
    hidden: Array2<f64>,
    probs: Array2<f64>,
}

impl ForwardCache {
    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn batch_len(&self) -> usize {
        self.input.nrows()
    }
}

/// Overlapping `(t_out, k * c)` patch view of one channels-last sample.
fn patches(sample: &[f64], t_out: usize, k: usize, c: usize) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((t_out, k * c).strides((c, 1)), sample).expect("patch view in bounds")
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// One conv layer in GEMM form plus its pooling width.
struct Stage<'a> {
    w: Array2<f64>,
    bias: &'a [f64],
    k: usize,
    c_in: usize,
    c_out: usize,
    pool: usize,
}

impl<'a> Stage<'a> {
    fn new(layer: &'a Conv1dLayer, pool: usize) -> Self {
        Stage {
            w: layer.gemm_weights(),
            bias: layer.bias.as_slice().expect("contiguous bias"),
            k: layer.kernel_len(),
            c_in: layer.in_channels(),
            c_out: layer.out_channels(),
            pool,
        }
    }

    /// conv -> bias -> ReLU -> max-pool on one sample. `conv` is scratch of
    /// shape `(t_conv, c_out)`; ties in the pool keep the earliest step.
    fn forward(&self, x: &[f64], conv: &mut Array2<f64>, out: &mut [f64], arg: &mut [u32]) {
        let (t_conv, c) = conv.dim();
        if self.c_in == 1 {
            // K = k is too thin for GEMM; accumulate directly.
            let ws = self.w.as_slice().expect("contiguous weights");
            let ys = conv.as_slice_mut().expect("contiguous scratch");
            for (t, row) in ys.chunks_exact_mut(c).enumerate() {
                row.copy_from_slice(self.bias);
                for j in 0..self.k {
                    let xv = x[t + j];
                    for (o, &wv) in row.iter_mut().zip(&ws[j * c..(j + 1) * c]) {
                        *o += xv * wv;
                    }
                }
            }
        } else {
            general_mat_mul(1.0, &patches(x, t_conv, self.k, self.c_in), &self.w, 0.0, conv);
            for row in conv.as_slice_mut().expect("contiguous scratch").chunks_exact_mut(c) {
                for (o, &bv) in row.iter_mut().zip(self.bias) {
                    *o += bv;
                }
            }
        }
        let ys = conv.as_slice().expect("contiguous scratch");
        let width = self.pool;
        for (t, (o, a)) in out.chunks_exact_mut(c).zip(arg.chunks_exact_mut(c)).enumerate() {
            let first = t * width;
            for (ch, (ov, av)) in o.iter_mut().zip(a.iter_mut()).enumerate() {
                *ov = relu(ys[first * c + ch]);
                *av = first as u32;
            }
            for step in first + 1..first + width {
                let row = &ys[step * c..(step + 1) * c];
                for ((ov, av), &v) in o.iter_mut().zip(a.iter_mut()).zip(row) {
                    if relu(v) > *ov {
                        *ov = relu(v);
                        *av = step as u32;
                    }
                }
            }
        }
    }

    /// Routes pooled gradients to their argmax, masked by ReLU, into `d_conv`.
    fn unpool(&self, d_pooled: &[f64], pooled: &[f64], arg: &[u32], d_conv: &mut Array2<f64>) {
        let c = self.c_out;
        let dst = d_conv.as_slice_mut().expect("contiguous scratch");
        dst.fill(0.0);
        for ((g, p), a) in d_pooled
            .chunks_exact(c)
            .zip(pooled.chunks_exact(c))
            .zip(arg.chunks_exact(c))
        {
            for ch in 0..c {
                if p[ch] > 0.0 {
                    dst[a[ch] as usize * c + ch] += g[ch];
                }
            }
        }
    }

    /// Adds kernel and bias gradients of one sample.
    fn accumulate(&self, x: &[f64], d_conv: &Array2<f64>, d_w: &mut Array2<f64>, d_b: &mut [f64]) {
        let t_conv = d_conv.nrows();
        general_mat_mul(1.0, &patches(x, t_conv, self.k, self.c_in).t(), d_conv, 1.0, d_w);
        for row in d_conv.as_slice().expect("contiguous scratch").chunks_exact(self.c_out) {
            for (acc, &g) in d_b.iter_mut().zip(row) {
                *acc += g;
            }
        }
    }

    /// Input gradient of one sample; `d_patch` is `(t_conv, k * c_in)` scratch.
    fn input_grad(&self, d_conv: &Array2<f64>, d_patch: &mut Array2<f64>, dx: &mut [f64]) {
        general_mat_mul(1.0, d_conv, &self.w.t(), 0.0, d_patch);
        dx.fill(0.0);
        let span = self.k * self.c_in;
        for (t, row) in d_patch.rows().into_iter().enumerate() {
            let dst = &mut dx[t * self.c_in..t * self.c_in + span];
            for (d, g) in dst.iter_mut().zip(row.iter()) {
                *d += g;
            }
        }
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Class probabilities for a `(B, input_len)` batch plus the backward cache.
pub fn forward(model: &ModelParams, batch: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
    let arch = model.arch;
    if batch.ncols() != arch.input_len {
        return Err(Error::Shape(format!(
            "batch width {} does not match model input length {}",
            batch.ncols(),
            arch.input_len
        )));
    }
    if batch.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("forward input".into()));
    }
    let b = batch.nrows();
    let l = &model.layers;
    let input = batch.as_standard_layout().into_owned();
    let [c1, p1, c2, p2] = arch.stage_lengths();
    let (f1, f2) = (arch.conv1_filters, arch.conv2_filters);
    let s1 = Stage::new(&l.conv1, arch.pool1);
    let s2 = Stage::new(&l.conv2, arch.pool2);

    let mut pool1 = Array3::zeros((b, p1, f1));
    let mut pool1_arg = vec![0u32; b * p1 * f1];
    let mut pool2 = Array3::zeros((b, p2, f2));
    let mut pool2_arg = vec![0u32; b * p2 * f2];
    let mut conv1 = Array2::zeros((c1, f1));
    let mut conv2 = Array2::zeros((c2, f2));
    {
        let x = input.as_slice().expect("standard layout");
        let o1 = pool1.as_slice_mut().expect("standard layout");
        let o2 = pool2.as_slice_mut().expect("standard layout");
        let (n1, n2) = (p1 * f1, p2 * f2);
        for s in 0..b {
            let (y1, a1) = (&mut o1[s * n1..(s + 1) * n1], &mut pool1_arg[s * n1..(s + 1) * n1]);
            s1.forward(&x[s * arch.input_len..(s + 1) * arch.input_len], &mut conv1, y1, a1);
            let (y2, a2) = (&mut o2[s * n2..(s + 1) * n2], &mut pool2_arg[s * n2..(s + 1) * n2]);
            s2.forward(y1, &mut conv2, y2, a2);
        }
    }
    let flat = pool2
        .view()
        .into_shape_with_order((b, arch.flat_len()))
        .expect("contiguous pool output");

    let mut hidden = Array2::zeros((b, arch.dense_units));
    general_mat_mul(1.0, &flat, &l.dense.weights.t(), 0.0, &mut hidden);
    for mut row in hidden.rows_mut() {
        row += &l.dense.bias;
        row.mapv_inplace(relu);
    }
    let mut probs = Array2::zeros((b, arch.n_classes));
    general_mat_mul(1.0, &hidden, &l.output.weights.t(), 0.0, &mut probs);
    for mut row in probs.rows_mut() {
        row += &l.output.bias;
    }
    softmax_rows(&mut probs);

    let cache = ForwardCache {
        revision: model.revision,
        arch,
        input,
        pool1,
        pool1_arg,
        pool2,
        pool2_arg,
        hidden,
        probs: probs.clone(),
    };
    Ok((probs, cache))
}

/// Exact gradients of the mean cross-entropy over the cached batch.
pub fn backward(model: &ModelParams, cache: &ForwardCache, onehot: ArrayView2<'_, f64>) -> Result<Gradients> {
    let mut grads = Layers::zeros(&model.arch);
    let scale = 1.0 / cache.batch_len().max(1) as f64;
    backward_accumulate(model, cache, onehot, scale, &mut grads)?;
    Ok(grads)
}

/// Adds `scale * d(sum of per-row losses)/d(params)` into `grads`.
///
/// With `scale = 1 / B_total` across several micro-batches of one batch this
/// yields the gradient of the batch-mean loss.
pub fn backward_accumulate(
    model: &ModelParams,
    cache: &ForwardCache,
    onehot: ArrayView2<'_, f64>,
    scale: f64,
    grads: &mut Gradients,
) -> Result<()> {
    if cache.revision != model.revision || cache.arch != model.arch {
        return Err(Error::StaleCache);
    }
    if onehot.dim() != cache.probs.dim() {
        return Err(Error::Shape(format!(
            "labels {:?} vs probabilities {:?}",
            onehot.dim(),
            cache.probs.dim()
        )));
    }
    if !grads.same_shapes(&model.layers) {
        return Err(Error::Shape("gradient buffer does not match model".into()));
    }
    let arch = model.arch;
    let l = &model.layers;
    let b = cache.batch_len();

    let mut d_logits = &cache.probs - &onehot;
    d_logits *= scale;

    general_mat_mul(1.0, &d_logits.t(), &cache.hidden, 1.0, &mut grads.output.weights);
    grads.output.bias += &d_logits.sum_axis(Axis(0));

    let mut d_hidden = d_logits.dot(&l.output.weights);
    d_hidden.zip_mut_with(&cache.hidden, |g, &h| {
        if h <= 0.0 {
            *g = 0.0;
        }
    });
    let flat = cache
        .pool2
        .view()
        .into_shape_with_order((b, arch.flat_len()))
        .expect("contiguous pool output");
    general_mat_mul(1.0, &d_hidden.t(), &flat, 1.0, &mut grads.dense.weights);
    grads.dense.bias += &d_hidden.sum_axis(Axis(0));
    let d_flat = d_hidden.dot(&l.dense.weights);

    let [c1, p1, c2, _] = arch.stage_lengths();
    let s1 = Stage::new(&l.conv1, arch.pool1);
    let s2 = Stage::new(&l.conv2, arch.pool2);
    let mut d_w1 = Array2::zeros(s1.w.dim());
    let mut d_w2 = Array2::zeros(s2.w.dim());
    let mut d_b1 = vec![0.0; s1.c_out];
    let mut d_b2 = vec![0.0; s2.c_out];
    let mut d_conv1 = Array2::zeros((c1, s1.c_out));
    let mut d_conv2 = Array2::zeros((c2, s2.c_out));
    let mut d_patch2 = Array2::zeros((c2, s2.k * s2.c_in));
    let mut d_pool1 = vec![0.0; p1 * s1.c_out];

    let x = cache.input.as_slice().expect("standard layout");
    let d_flat = d_flat.as_slice().expect("standard layout");
    let pool1 = cache.pool1.as_slice().expect("standard layout");
    let pool2 = cache.pool2.as_slice().expect("standard layout");
    let n1 = d_pool1.len();
    let n2 = arch.flat_len();
    for s in 0..b {
        let r1 = s * n1..(s + 1) * n1;
        let r2 = s * n2..(s + 1) * n2;
        s2.unpool(&d_flat[r2.clone()], &pool2[r2.clone()], &cache.pool2_arg[r2], &mut d_conv2);
        s2.accumulate(&pool1[r1.clone()], &d_conv2, &mut d_w2, &mut d_b2);
        s2.input_grad(&d_conv2, &mut d_patch2, &mut d_pool1);
        s1.unpool(&d_pool1, &pool1[r1.clone()], &cache.pool1_arg[r1], &mut d_conv1);
        let xs = &x[s * arch.input_len..(s + 1) * arch.input_len];
        s1.accumulate(xs, &d_conv1, &mut d_w1, &mut d_b1);
    }
    grads.conv2.add_gemm_grad(&d_w2);
    grads.conv1.add_gemm_grad(&d_w1);
    for (g, d) in grads.conv2.bias.iter_mut().zip(&d_b2) {
        *g += d;
    }
    for (g, d) in grads.conv1.bias.iter_mut().zip(&d_b1) {
        *g += d;
    }
    Ok(())
}

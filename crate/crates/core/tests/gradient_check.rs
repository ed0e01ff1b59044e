//! Backprop against central finite differences on a downsized network.

use ndarray::Array2;
use neurofuse::nn::{backward, cross_entropy, forward, ArchConfig, ModelParams, TENSOR_NAMES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-6;
const MAX_REL_ERR: f64 = 1e-4;
/// Denominator floor so gradients near zero are judged on absolute error.
const DENOM_FLOOR: f64 = 1e-6;

fn small_arch() -> ArchConfig {
    ArchConfig {
        input_len: 32,
        conv1_filters: 2,
        conv1_kernel: 3,
        pool1: 2,
        conv2_filters: 2,
        conv2_kernel: 3,
        pool2: 2,
        dense_units: 6,
        n_classes: 5,
    }
}

fn batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> (Array2<f64>, Array2<f64>) {
    let x = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0));
    let mut y = Array2::zeros((rows, 5));
    for r in 0..rows {
        y[[r, (r * 3 + 1) % 5]] = 1.0;
    }
    (x, y)
}

/// Model with every bias perturbed away from zero so all paths carry signal.
fn model_with_biases(seed: u64) -> ModelParams {
    let mut m = ModelParams::init(small_arch(), seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    let layers = m.layers_mut();
    for (i, t) in layers.tensors_mut().into_iter().enumerate() {
        if i % 2 == 1 {
            t.iter_mut().for_each(|v| *v = rng.gen_range(0.05..0.3));
        }
    }
    m
}

fn loss(m: &ModelParams, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let (p, _) = forward(m, x.view()).unwrap();
    cross_entropy(p.view(), y.view()).unwrap()
}

#[test]
fn every_tensor_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = model_with_biases(3);
    let (x, y) = batch(&mut rng, 4, 32);
    let (_, cache) = forward(&m, x.view()).unwrap();
    let grads = backward(&m, &cache, y.view()).unwrap();

    for (ti, name) in TENSOR_NAMES.iter().enumerate() {
        let n = m.layers().tensors()[ti].len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut plus = m.clone();
            plus.layers_mut().tensors_mut()[ti][i] += STEP;
            let mut minus = m.clone();
            minus.layers_mut().tensors_mut()[ti][i] -= STEP;
            let numeric = (loss(&plus, &x, &y) - loss(&minus, &x, &y)) / (2.0 * STEP);
            let analytic = grads.tensors()[ti][i];
            let denom = (analytic.abs() + numeric.abs()).max(DENOM_FLOOR);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
        assert!(worst < MAX_REL_ERR, "{name}: max relative error {worst:e}");
    }
}

#[test]
fn output_logit_gradient_is_probs_minus_onehot_over_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = model_with_biases(5);
    let (x, y) = batch(&mut rng, 4, 32);
    let (p, cache) = forward(&m, x.view()).unwrap();
    let grads = backward(&m, &cache, y.view()).unwrap();
    let expected = (&p - &y).sum_axis(ndarray::Axis(0)) / 4.0;
    for (g, e) in grads.output.bias.iter().zip(expected.iter()) {
        assert!((g - e).abs() < 1e-15);
    }
}

#[test]
fn zero_input_gives_zero_conv_kernel_gradients() {
    let x = Array2::zeros((4, 32));
    let mut y = Array2::zeros((4, 5));
    for r in 0..4 {
        y[[r, r]] = 1.0;
    }

    // Fresh init has zero biases, so nothing reaches either conv kernel.
    let fresh = ModelParams::init(small_arch(), 9).unwrap();
    let (_, cache) = forward(&fresh, x.view()).unwrap();
    let g = backward(&fresh, &cache, y.view()).unwrap();
    assert!(g.conv1.kernels.iter().all(|&v| v == 0.0));
    assert!(g.conv2.kernels.iter().all(|&v| v == 0.0));
    assert!(g.output.bias.iter().any(|&v| v != 0.0));

    // With biases set, the first kernel still sees only zeros while its bias learns.
    let biased = model_with_biases(9);
    let (_, cache) = forward(&biased, x.view()).unwrap();
    let g = backward(&biased, &cache, y.view()).unwrap();
    assert!(g.conv1.kernels.iter().all(|&v| v == 0.0));
    assert!(g.conv1.bias.iter().any(|&v| v != 0.0));
    assert!(g.dense.bias.iter().any(|&v| v != 0.0));
}

#[test]
fn stale_cache_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut m = model_with_biases(1);
    let (x, y) = batch(&mut rng, 2, 32);
    let (_, cache) = forward(&m, x.view()).unwrap();
    m.layers_mut().output.bias[0] += 1.0;
    assert!(backward(&m, &cache, y.view()).is_err());
}

use serde::{Deserialize, Serialize};

use super::model::{Gradients, Layers, ModelParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Layers,
    pub v: Layers,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(model: &ModelParams, hyper: AdamHyper) -> Self {
        AdamState {
            m: Layers::zeros(model.arch()),
            v: Layers::zeros(model.arch()),
            t: 0,
            hyper,
        }
    }
}

/// Bias-corrected Adam update of one flat tensor at step `t` (1-based).
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    h: &AdamHyper,
) -> Result<()> {
    let n = params.len();
    if grads.len() != n || m.len() != n || v.len() != n {
        return Err(Error::Shape(format!(
            "adam: params {n}, grads {}, m {}, v {}",
            grads.len(),
            m.len(),
            v.len()
        )));
    }
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let c1 = 1.0 - h.beta1.powi(t);
    let c2 = 1.0 - h.beta2.powi(t);
    for i in 0..n {
        let g = grads[i];
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
    }
    Ok(())
}

pub fn adam_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if !grads.same_shapes(params.layers())
        || !state.m.same_shapes(params.layers())
        || !state.v.same_shapes(params.layers())
    {
        return Err(Error::Shape(
            "gradient or moment shapes do not match the model".into(),
        ));
    }
    state.t += 1;
    let t = state.t;
    let hyper = state.hyper;
    let g = grads.tensors();
    let layers = params.layers_mut();
    for (((p, g), m), v) in layers
        .tensors_mut()
        .into_iter()
        .zip(g)
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut())
    {
        adam_update(p, g, m, v, t, &hyper)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::ArchConfig;

    fn small() -> ModelParams {
        let arch = ArchConfig {
            input_len: 16,
            conv1_filters: 2,
            conv1_kernel: 3,
            pool1: 2,
            conv2_filters: 2,
            conv2_kernel: 3,
            pool2: 2,
            dense_units: 4,
            n_classes: 5,
        };
        ModelParams::init(arch, 2).unwrap()
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = small();
        let before = p.layers().clone();
        let mut st = AdamState::new(&p, AdamHyper::default());
        let g = Layers::zeros(p.arch());
        adam_step(&mut p, &g, &mut st).unwrap();
        assert_eq!(p.layers(), &before);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn scalar_first_step() {
        let h = AdamHyper::default();
        let (mut p, mut m, mut v) = ([0.0], [0.0], [0.0]);
        adam_update(&mut p, &[1.0], &mut m, &mut v, 1, &h).unwrap();
        let want = -0.001 * (1.0 / (1.0 + 1e-8));
        assert!((p[0] - want).abs() < 1e-18);
        assert!((p[0] + 0.001).abs() < 1e-10);
    }

    #[test]
    fn identical_runs_identical_trajectories() {
        let run = || {
            let mut p = small();
            let mut st = AdamState::new(&p, AdamHyper::default());
            let mut g = Layers::zeros(p.arch());
            for step in 0..5 {
                g.fill(0.1 * f64::from(step) - 0.2);
                adam_step(&mut p, &g, &mut st).unwrap();
            }
            p
        };
        assert_eq!(run().layers(), run().layers());
    }

    #[test]
    fn shape_mismatch() {
        let mut p = small();
        let mut st = AdamState::new(&p, AdamHyper::default());
        let g = Layers::zeros(&ArchConfig::default());
        assert!(adam_step(&mut p, &g, &mut st).is_err());
        assert!(adam_update(&mut [0.0; 2], &[0.0], &mut [0.0; 2], &mut [0.0; 2], 1, &AdamHyper::default()).is_err());
    }
}

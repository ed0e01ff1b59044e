//! From-scratch 1D convolutional classifier, loss, optimiser and scaling.

pub mod adam;
pub mod loss;
pub mod model;
pub mod scaler;
pub mod train;

pub use adam::{adam_step, adam_update, AdamHyper, AdamState};
pub use loss::cross_entropy;
pub use model::{
    backward, backward_accumulate, forward, ArchConfig, Conv1dLayer, DenseLayer, ForwardCache,
    Gradients, Layers, ModelParams, TENSOR_NAMES,
};
pub use scaler::{scaler_fit, scaler_transform, ScalerStats};
pub use train::{predict, predict_subset, train, train_subset, EpochStats, History};

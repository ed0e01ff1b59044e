//! On-disk formats: NPY arrays, corpus manifests, fused datasets and model
//! checkpoints.

pub mod checkpoint;
pub mod dataset;
pub mod manifest;
pub mod npy;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use dataset::{load_corpus, DatasetIndex, DatasetTrial};
pub use manifest::{Manifest, ManifestEntry, MANIFEST_FILE, MANIFEST_VERSION};
pub use npy::{read_npy, read_npy_raw, read_npy_shape, write_npy, write_npy_raw, NpyWriter};

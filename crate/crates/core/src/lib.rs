//! Respiratory-sound classification pipeline:
//! one-second audio windows are reshaped into square sample matrices, a
//! small CNN trained on those matrices doubles as a feature extractor
//! (activations of its last pooling layer), and the extracted features
//! feed KNN, SVM and decision-tree classifiers that are compared through
//! confusion-matrix metrics.
//!
//! The crate is organized along the pipeline stages:
//!
//! - [`audio`]: WAV parsing, windowing, normalization, reshaping, splits
//! - [`tensor`] / [`nn`]: dense tensors and the differentiable layer kernels
//! - [`model`]: the reference CNN, its training loop and checkpoints
//! - [`classifiers`]: KNN, pairwise SVM, CART decision tree
//! - [`eval`]: confusion matrices, precision/recall/F1, report tables
//! - [`synth`]: seeded tone corpus for desk-scale end-to-end verification

pub mod audio;
pub mod error;
pub mod eval;
pub mod io;
pub mod nn;
pub mod tensor;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

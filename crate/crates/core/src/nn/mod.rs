//! Differentiable layer kernels: valid convolution, max-pooling, flatten,
//! dense, ReLU and softmax cross-entropy, plus SGD-with-momentum and a
//! finite-difference gradient checker.
//!
//! All kernels are pure functions of (input, parameters) and are generic
//! over the float width; see [`crate::tensor::Scalar`].

pub mod gradcheck;
pub mod layers;
pub mod optim;

pub use gradcheck::max_relative_error;
pub use layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, flatten, maxpool_backward,
    maxpool_forward, relu, relu_backward, softmax_cross_entropy, unflatten, ConvLayer, DenseLayer,
    MaxPoolMask, PoolLayer,
};
pub use optim::sgd_momentum_step;

//! Plain SGD with a single velocity buffer per parameter tensor.

use crate::error::{Error, Result};
use crate::tensor::Scalar;

/// v ← momentum·v − lr·g;  p ← p + v
pub fn sgd_momentum_step<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    velocity: &mut [T],
    lr: T,
    momentum: T,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != velocity.len() {
        return Err(Error::Shape(format!(
            "sgd buffers disagree: {} params, {} grads, {} velocity",
            params.len(),
            grads.len(),
            velocity.len()
        )));
    }
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        *v = momentum * *v - lr * g;
        *p += *v;
    }
    Ok(())
}

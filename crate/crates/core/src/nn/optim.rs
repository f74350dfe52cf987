//! Plain stochastic gradient descent, no momentum.

use super::TensorBuffer;
use crate::{Error, Result};

/// `w <- w - eta * g` elementwise.
pub fn sgd_step(weights: &mut TensorBuffer, grads: &TensorBuffer, eta: f32) -> Result<()> {
    if weights.shape() != grads.shape() {
        return Err(Error::dim(
            "sgd_step",
            format!("{:?}", weights.shape()),
            format!("{:?}", grads.shape()),
        ));
    }
    if eta <= 0.0 {
        return Err(Error::Argument(format!("learning rate must be positive, got {eta}")));
    }
    for (w, &g) in weights.data_mut().iter_mut().zip(grads.data()) {
        *w -= eta * g;
    }
    Ok(())
}

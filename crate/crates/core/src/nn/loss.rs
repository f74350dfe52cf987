//! Cross-entropy loss over softmax probabilities.

use super::TensorBuffer;
use crate::{Error, Result};

/// Floor applied to the predicted probability before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln p_true` with `p_true` clamped below by [`PROB_FLOOR`].
/// `true_label` is 1-based.
pub fn cross_entropy(probabilities: &TensorBuffer, true_label: usize) -> Result<f64> {
    let k = probabilities.len();
    if true_label < 1 || true_label > k {
        return Err(Error::Argument(format!(
            "label {true_label} out of range 1..={k}"
        )));
    }
    let p = probabilities.data()[true_label - 1] as f64;
    Ok(-p.max(PROB_FLOOR).ln())
}

/// Gradient of the cross-entropy loss with respect to the pre-softmax
/// scores: `p - onehot(true_label)`.
pub fn softmax_cross_entropy_grad(
    probabilities: &TensorBuffer,
    true_label: usize,
) -> Result<TensorBuffer> {
    let k = probabilities.len();
    if true_label < 1 || true_label > k {
        return Err(Error::Argument(format!(
            "label {true_label} out of range 1..={k}"
        )));
    }
    let mut grad = probabilities.clone();
    grad.data_mut()[true_label - 1] -= 1.0;
    Ok(grad)
}

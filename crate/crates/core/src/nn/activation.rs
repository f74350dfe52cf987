//! Elementwise activations and the softmax head.

use super::TensorBuffer;

/// `y = max(0, x)` elementwise.
pub fn relu_forward(x: &TensorBuffer) -> TensorBuffer {
    let data = x.data().iter().map(|&v| v.max(0.0)).collect();
    TensorBuffer::from_vec(x.shape(), data).expect("shape preserved")
}

/// `grad_x = grad_out` where `x > 0`, else 0. The subgradient at exactly
/// zero is taken as 0.
pub fn relu_backward(x: &TensorBuffer, grad_out: &TensorBuffer) -> TensorBuffer {
    assert_eq!(x.len(), grad_out.len(), "relu_backward length mismatch");
    let data = x
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&xv, &gv)| if xv > 0.0 { gv } else { 0.0 })
        .collect();
    TensorBuffer::from_vec(x.shape(), data).expect("shape preserved")
}

/// Bounded sigmoid `2 / (1 + exp(-2n)) - 1`, mapping into (-1, 1).
/// Mathematically identical to `tanh(n)`.
pub fn tansig(x: &TensorBuffer) -> TensorBuffer {
    let data = x
        .data()
        .iter()
        .map(|&v| (2.0 / (1.0 + (-2.0 * v as f64).exp()) - 1.0) as f32)
        .collect();
    TensorBuffer::from_vec(x.shape(), data).expect("shape preserved")
}

/// Derivative through the activated output: `grad_x = (1 - y^2) * grad_out`.
pub fn tansig_backward(y: &TensorBuffer, grad_out: &TensorBuffer) -> TensorBuffer {
    assert_eq!(y.len(), grad_out.len(), "tansig_backward length mismatch");
    let data = y
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&yv, &gv)| (1.0 - yv * yv) * gv)
        .collect();
    TensorBuffer::from_vec(y.shape(), data).expect("shape preserved")
}

/// Numerically stable softmax: scores are shifted by their maximum before
/// exponentiation, so the output is invariant under adding a constant to
/// every score. Outputs are positive and sum to 1.
pub fn softmax(scores: &TensorBuffer) -> TensorBuffer {
    let max = scores.data().iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f64> = scores
        .data()
        .iter()
        .map(|&v| ((v - max) as f64).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    let data = exps.iter().map(|&e| (e / total) as f32).collect();
    TensorBuffer::from_vec(scores.shape(), data).expect("shape preserved")
}

//! Fully connected layer.

use super::TensorBuffer;
use crate::{Error, Result};

/// Gradients returned by [`dense_backward`].
#[derive(Debug)]
pub struct DenseGrads {
    pub grad_input: TensorBuffer,
    pub grad_weights: TensorBuffer,
    pub grad_bias: TensorBuffer,
}

fn check_dims(x: &TensorBuffer, weights: &TensorBuffer, bias: &TensorBuffer) -> Result<(usize, usize)> {
    let wshape = weights.shape();
    if wshape.len() != 2 {
        return Err(Error::dim("dense weights", "[n, m]", format!("{wshape:?}")));
    }
    let (n, m) = (wshape[0], wshape[1]);
    if x.len() != n {
        return Err(Error::dim("dense input", n, x.len()));
    }
    if bias.shape() != [m] {
        return Err(Error::dim("dense bias", format!("[{m}]"), format!("{:?}", bias.shape())));
    }
    Ok((n, m))
}

/// `y[j] = bias[j] + sum_i x[i] * weights[i, j]`.
pub fn dense_forward(x: &TensorBuffer, weights: &TensorBuffer, bias: &TensorBuffer) -> Result<TensorBuffer> {
    let (n, m) = check_dims(x, weights, bias)?;
    let mut acc = bias.data().to_vec();
    let w = weights.data();
    for (i, &xv) in x.data().iter().enumerate().take(n) {
        if xv == 0.0 {
            continue;
        }
        let wrow = &w[i * m..(i + 1) * m];
        for (a, &wv) in acc.iter_mut().zip(wrow) {
            *a += xv * wv;
        }
    }
    TensorBuffer::from_vec(&[m], acc)
}

/// Chain-rule gradients for the dense layer.
pub fn dense_backward(
    x: &TensorBuffer,
    weights: &TensorBuffer,
    grad_out: &TensorBuffer,
) -> Result<DenseGrads> {
    let bias_probe = TensorBuffer::zeros(&[weights.shape().get(1).copied().unwrap_or(1).max(1)]);
    let (n, m) = check_dims(x, weights, &bias_probe)?;
    if grad_out.len() != m {
        return Err(Error::dim("dense grad_out", m, grad_out.len()));
    }

    let w = weights.data();
    let g = grad_out.data();
    let mut grad_input = TensorBuffer::zeros(&[n]);
    let mut grad_weights = TensorBuffer::zeros(&[n, m]);
    {
        let gi = grad_input.data_mut();
        let gw = grad_weights.data_mut();
        for (i, &xv) in x.data().iter().enumerate() {
            let wrow = &w[i * m..(i + 1) * m];
            let gwrow = &mut gw[i * m..(i + 1) * m];
            let mut dot = 0.0f32;
            for ((gw_e, &w_e), &g_e) in gwrow.iter_mut().zip(wrow).zip(g) {
                *gw_e = xv * g_e;
                dot += w_e * g_e;
            }
            gi[i] = dot;
        }
    }
    Ok(DenseGrads {
        grad_input,
        grad_weights,
        grad_bias: grad_out.clone().flattened(),
    })
}

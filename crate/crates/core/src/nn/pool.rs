//! Max pooling with an explicit argmax map for the backward pass.

use super::TensorBuffer;
use crate::{Error, Result};

/// `y[i, j, c]` is the max over a `window x window` patch anchored at
/// `(i * stride, j * stride)` in channel `c`. The returned index map stores
/// the flat input index of each maximum; ties resolve to the first maximum
/// in row-major scan order.
pub fn maxpool_forward(
    x: &TensorBuffer,
    window: usize,
    stride: usize,
) -> Result<(TensorBuffer, Vec<usize>)> {
    let shape = x.shape();
    if shape.len() != 3 {
        return Err(Error::dim("maxpool input", "[H, W, C]", format!("{shape:?}")));
    }
    let (h, w, c) = (shape[0], shape[1], shape[2]);
    if window == 0 || stride == 0 {
        return Err(Error::Argument("maxpool window and stride must be >= 1".into()));
    }
    if window > h || window > w {
        return Err(Error::dim(
            "maxpool window",
            format!("window <= [{h}, {w}]"),
            window,
        ));
    }

    let out_h = (h - window) / stride + 1;
    let out_w = (w - window) / stride + 1;
    let mut y = TensorBuffer::zeros(&[out_h, out_w, c]);
    let mut argmax = vec![0usize; out_h * out_w * c];

    let xd = x.data();
    let yd = y.data_mut();
    for oy in 0..out_h {
        for ox in 0..out_w {
            let out_base = (oy * out_w + ox) * c;
            for ch in 0..c {
                let mut best = f32::NEG_INFINITY;
                let mut best_idx = 0usize;
                for dy in 0..window {
                    let iy = oy * stride + dy;
                    for dx in 0..window {
                        let ix = ox * stride + dx;
                        let idx = (iy * w + ix) * c + ch;
                        let v = xd[idx];
                        if v > best {
                            best = v;
                            best_idx = idx;
                        }
                    }
                }
                yd[out_base + ch] = best;
                argmax[out_base + ch] = best_idx;
            }
        }
    }
    Ok((y, argmax))
}

/// Route each output gradient to its stored argmax position, accumulating
/// across overlapping windows.
pub fn maxpool_backward(
    argmax: &[usize],
    grad_out: &TensorBuffer,
    input_shape: &[usize],
) -> Result<TensorBuffer> {
    if grad_out.len() != argmax.len() {
        return Err(Error::dim("maxpool grad_out", argmax.len(), grad_out.len()));
    }
    let mut grad_x = TensorBuffer::zeros(input_shape);
    let gx = grad_x.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        gx[idx] += g;
    }
    Ok(grad_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_covering_whole_input() {
        let x = TensorBuffer::from_vec(&[2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, argmax) = maxpool_forward(&x, 2, 1).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1]);
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(argmax, vec![3]);
    }

    #[test]
    fn output_side_arithmetic() {
        // 23x23x100, window 2, stride 1 -> 22x22x100 (flattens to 48,400)
        let x = TensorBuffer::zeros(&[23, 23, 100]);
        let (y, _) = maxpool_forward(&x, 2, 1).unwrap();
        assert_eq!(y.shape(), &[22, 22, 100]);
        assert_eq!(y.len(), 48_400);
    }

    #[test]
    fn tie_breaks_to_first_in_row_major_order() {
        let x = TensorBuffer::from_vec(&[2, 2, 1], vec![5.0, 5.0, 5.0, 5.0]).unwrap();
        let (_, argmax) = maxpool_forward(&x, 2, 1).unwrap();
        assert_eq!(argmax, vec![0]);
    }

    #[test]
    fn window_larger_than_input_is_an_error() {
        let x = TensorBuffer::zeros(&[2, 2, 1]);
        assert!(matches!(maxpool_forward(&x, 3, 1), Err(Error::Dimension { .. })));
    }

    #[test]
    fn backward_conserves_gradient_mass_for_unique_argmaxes() {
        let x = TensorBuffer::from_vec(
            &[3, 3, 1],
            vec![1.0, 2.0, 3.0, 4.0, 9.0, 6.0, 7.0, 8.0, 5.0],
        )
        .unwrap();
        let (y, argmax) = maxpool_forward(&x, 2, 1).unwrap();
        assert_eq!(y.data(), &[9.0, 9.0, 9.0, 9.0]);
        let grad_out = TensorBuffer::from_vec(&[2, 2, 1], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let grad_x = maxpool_backward(&argmax, &grad_out, &[3, 3, 1]).unwrap();
        // All four windows share the same argmax (the 9 at center).
        let total: f32 = grad_x.data().iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!((grad_x.data()[4] - 1.0).abs() < 1e-6);
    }
}

//! 2-D convolution, forward and backward.
//!
//! Cross-correlation convention: the kernel is not flipped. Axis order is
//! `[height, width, channels]` for activations and
//! `[kernel_h, kernel_w, in_channels, out_channels]` for weights, so the
//! innermost loops run over contiguous out-channel slices.

use super::{LayerSpec, Padding, TensorBuffer};
use crate::{Error, Result};

/// Gradients returned by [`conv2d_backward`].
#[derive(Debug)]
pub struct ConvGrads {
    pub grad_input: TensorBuffer,
    pub grad_weights: TensorBuffer,
    pub grad_bias: TensorBuffer,
}

struct ConvDims {
    kh: usize,
    kw: usize,
    cin: usize,
    cout: usize,
    in_h: usize,
    in_w: usize,
    out_h: usize,
    out_w: usize,
    pad_top: usize,
    pad_left: usize,
}

fn check_dims(
    input: &TensorBuffer,
    spec: &LayerSpec,
    weights: &TensorBuffer,
    bias: &TensorBuffer,
) -> Result<ConvDims> {
    let (kh, kw, cin, cout, padding) = match *spec {
        LayerSpec::Conv {
            kernel_h,
            kernel_w,
            in_channels,
            out_channels,
            padding,
        } => (kernel_h, kernel_w, in_channels, out_channels, padding),
        _ => return Err(Error::Argument(format!("expected conv spec, got {spec:?}"))),
    };
    spec.validate()?;

    let ishape = input.shape();
    if ishape.len() != 3 || ishape[2] != cin {
        return Err(Error::dim(
            "conv2d input",
            format!("[H, W, {cin}]"),
            format!("{ishape:?}"),
        ));
    }
    if weights.shape() != [kh, kw, cin, cout] {
        return Err(Error::dim(
            "conv2d weights",
            format!("[{kh}, {kw}, {cin}, {cout}]"),
            format!("{:?}", weights.shape()),
        ));
    }
    if bias.shape() != [cout] {
        return Err(Error::dim(
            "conv2d bias",
            format!("[{cout}]"),
            format!("{:?}", bias.shape()),
        ));
    }

    let (in_h, in_w) = (ishape[0], ishape[1]);
    let (out_h, out_w, pad_top, pad_left) = match padding {
        Padding::Valid => {
            if in_h < kh || in_w < kw {
                return Err(Error::dim(
                    "conv2d valid padding",
                    format!("input at least [{kh}, {kw}]"),
                    format!("[{in_h}, {in_w}]"),
                ));
            }
            (in_h - kh + 1, in_w - kw + 1, 0, 0)
        }
        Padding::Same => (in_h, in_w, (kh - 1) / 2, (kw - 1) / 2),
    };

    Ok(ConvDims {
        kh,
        kw,
        cin,
        cout,
        in_h,
        in_w,
        out_h,
        out_w,
        pad_top,
        pad_left,
    })
}

/// Forward convolution: `out[oy, ox, co] = bias[co] + sum over (ky, kx, ci)
/// of input[oy + ky - pad, ox + kx - pad, ci] * weights[ky, kx, ci, co]`,
/// with zero contribution outside the input.
pub fn conv2d_forward(
    input: &TensorBuffer,
    spec: &LayerSpec,
    weights: &TensorBuffer,
    bias: &TensorBuffer,
) -> Result<TensorBuffer> {
    let d = check_dims(input, spec, weights, bias)?;
    let mut out = TensorBuffer::zeros(&[d.out_h, d.out_w, d.cout]);

    let x = input.data();
    let w = weights.data();
    let b = bias.data();
    let o = out.data_mut();
    let mut acc = vec![0.0f32; d.cout];

    for oy in 0..d.out_h {
        for ox in 0..d.out_w {
            acc.copy_from_slice(b);
            for ky in 0..d.kh {
                let iy = (oy + ky).wrapping_sub(d.pad_top);
                if iy >= d.in_h {
                    continue;
                }
                for kx in 0..d.kw {
                    let ix = (ox + kx).wrapping_sub(d.pad_left);
                    if ix >= d.in_w {
                        continue;
                    }
                    let in_base = (iy * d.in_w + ix) * d.cin;
                    let w_base = ((ky * d.kw + kx) * d.cin) * d.cout;
                    let xrow = &x[in_base..in_base + d.cin];
                    let wslab = &w[w_base..w_base + d.cin * d.cout];
                    for (&xv, wrow) in xrow.iter().zip(wslab.chunks_exact(d.cout)) {
                        if xv == 0.0 {
                            continue;
                        }
                        for (a, &wv) in acc.iter_mut().zip(wrow) {
                            *a += xv * wv;
                        }
                    }
                }
            }
            let out_base = (oy * d.out_w + ox) * d.cout;
            o[out_base..out_base + d.cout].copy_from_slice(&acc);
        }
    }
    Ok(out)
}

/// Gradients of a scalar loss with respect to input, weights, and bias,
/// given the gradient with respect to the forward output.
pub fn conv2d_backward(
    input: &TensorBuffer,
    spec: &LayerSpec,
    weights: &TensorBuffer,
    grad_out: &TensorBuffer,
) -> Result<ConvGrads> {
    let bias_probe = TensorBuffer::zeros(&[match *spec {
        LayerSpec::Conv { out_channels, .. } => out_channels,
        _ => 1,
    }]);
    let d = check_dims(input, spec, weights, &bias_probe)?;
    if grad_out.shape() != [d.out_h, d.out_w, d.cout] {
        return Err(Error::dim(
            "conv2d grad_out",
            format!("[{}, {}, {}]", d.out_h, d.out_w, d.cout),
            format!("{:?}", grad_out.shape()),
        ));
    }

    let x = input.data();
    let w = weights.data();
    let g = grad_out.data();

    let mut grad_input = TensorBuffer::zeros(&[d.in_h, d.in_w, d.cin]);
    let mut grad_weights = TensorBuffer::zeros(&[d.kh, d.kw, d.cin, d.cout]);
    let mut grad_bias_acc = vec![0.0f64; d.cout];

    let gi = grad_input.data_mut();
    let gw = grad_weights.data_mut();

    // Transposed copy of the kernel ([ky, kx, cout, cin]) so the
    // grad-input update runs over contiguous in-channel rows.
    let mut wt = vec![0.0f32; w.len()];
    for ky in 0..d.kh {
        for kx in 0..d.kw {
            let base = (ky * d.kw + kx) * d.cin * d.cout;
            for ci in 0..d.cin {
                for co in 0..d.cout {
                    wt[base + co * d.cin + ci] = w[base + ci * d.cout + co];
                }
            }
        }
    }

    for oy in 0..d.out_h {
        for ox in 0..d.out_w {
            let g_base = (oy * d.out_w + ox) * d.cout;
            let grow = &g[g_base..g_base + d.cout];
            for (a, &gv) in grad_bias_acc.iter_mut().zip(grow) {
                *a += gv as f64;
            }
            for ky in 0..d.kh {
                let iy = (oy + ky).wrapping_sub(d.pad_top);
                if iy >= d.in_h {
                    continue;
                }
                for kx in 0..d.kw {
                    let ix = (ox + kx).wrapping_sub(d.pad_left);
                    if ix >= d.in_w {
                        continue;
                    }
                    let in_base = (iy * d.in_w + ix) * d.cin;
                    let w_base = ((ky * d.kw + kx) * d.cin) * d.cout;
                    let xrow = &x[in_base..in_base + d.cin];
                    let gwslab = &mut gw[w_base..w_base + d.cin * d.cout];
                    for (&xv, gwrow) in xrow.iter().zip(gwslab.chunks_exact_mut(d.cout)) {
                        if xv == 0.0 {
                            continue;
                        }
                        for (gw_e, &g_e) in gwrow.iter_mut().zip(grow) {
                            *gw_e += xv * g_e;
                        }
                    }
                    let girow = &mut gi[in_base..in_base + d.cin];
                    let wtslab = &wt[w_base..w_base + d.cin * d.cout];
                    for (&gv, wtrow) in grow.iter().zip(wtslab.chunks_exact(d.cin)) {
                        if gv == 0.0 {
                            continue;
                        }
                        for (gi_e, &wv) in girow.iter_mut().zip(wtrow) {
                            *gi_e += gv * wv;
                        }
                    }
                }
            }
        }
    }

    let grad_bias = TensorBuffer::from_vec(
        &[d.cout],
        grad_bias_acc.iter().map(|&v| v as f32).collect(),
    )?;
    Ok(ConvGrads {
        grad_input,
        grad_weights,
        grad_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv_spec(kh: usize, kw: usize, cin: usize, cout: usize, padding: Padding) -> LayerSpec {
        LayerSpec::Conv {
            kernel_h: kh,
            kernel_w: kw,
            in_channels: cin,
            out_channels: cout,
            padding,
        }
    }

    #[test]
    fn scalar_affine() {
        // 1x1x1 input [2], 1x1 kernel weight 3, bias 1 -> [7]
        let input = TensorBuffer::from_vec(&[1, 1, 1], vec![2.0]).unwrap();
        let w = TensorBuffer::from_vec(&[1, 1, 1, 1], vec![3.0]).unwrap();
        let b = TensorBuffer::from_vec(&[1], vec![1.0]).unwrap();
        let out = conv2d_forward(&input, &conv_spec(1, 1, 1, 1, Padding::Valid), &w, &b).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1]);
        assert_eq!(out.data(), &[7.0]);
    }

    #[test]
    fn valid_shape_arithmetic() {
        // 27x27x3, 5x5 valid, 100 channels -> 23x23x100
        let input = TensorBuffer::zeros(&[27, 27, 3]);
        let w = TensorBuffer::zeros(&[5, 5, 3, 100]);
        let b = TensorBuffer::zeros(&[100]);
        let out = conv2d_forward(&input, &conv_spec(5, 5, 3, 100, Padding::Valid), &w, &b).unwrap();
        assert_eq!(out.shape(), &[23, 23, 100]);
    }

    #[test]
    fn same_padding_keeps_size() {
        let input = TensorBuffer::zeros(&[23, 23, 4]);
        let w = TensorBuffer::zeros(&[3, 3, 4, 5]);
        let b = TensorBuffer::zeros(&[5]);
        let out = conv2d_forward(&input, &conv_spec(3, 3, 4, 5, Padding::Same), &w, &b).unwrap();
        assert_eq!(out.shape(), &[23, 23, 5]);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let input = TensorBuffer::zeros(&[6, 6, 2]);
        let w = TensorBuffer::zeros(&[3, 3, 3, 4]); // wrong cin
        let b = TensorBuffer::zeros(&[4]);
        let err = conv2d_forward(&input, &conv_spec(3, 3, 3, 4, Padding::Valid), &w, &b);
        assert!(matches!(err, Err(Error::Dimension { .. })));

        let w = TensorBuffer::zeros(&[3, 3, 2, 4]);
        let input_small = TensorBuffer::zeros(&[2, 6, 2]); // H < kh under valid
        let err = conv2d_forward(&input_small, &conv_spec(3, 3, 2, 4, Padding::Valid), &w, &b);
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn zero_grad_out_gives_zero_grads() {
        let input = TensorBuffer::from_vec(&[3, 3, 1], (1..=9).map(|v| v as f32).collect()).unwrap();
        let w = TensorBuffer::from_vec(&[2, 2, 1, 1], vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        let spec = conv_spec(2, 2, 1, 1, Padding::Valid);
        let grad_out = TensorBuffer::zeros(&[2, 2, 1]);
        let grads = conv2d_backward(&input, &spec, &w, &grad_out).unwrap();
        assert!(grads.grad_input.data().iter().all(|&v| v == 0.0));
        assert!(grads.grad_weights.data().iter().all(|&v| v == 0.0));
        assert!(grads.grad_bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_chain_rule() {
        // 1x1 kernel scalar case: grad_weight = input * grad_out
        let input = TensorBuffer::from_vec(&[1, 1, 1], vec![3.0]).unwrap();
        let w = TensorBuffer::from_vec(&[1, 1, 1, 1], vec![0.25]).unwrap();
        let spec = conv_spec(1, 1, 1, 1, Padding::Valid);
        let grad_out = TensorBuffer::from_vec(&[1, 1, 1], vec![2.0]).unwrap();
        let grads = conv2d_backward(&input, &spec, &w, &grad_out).unwrap();
        assert_eq!(grads.grad_weights.data(), &[6.0]);
        assert_eq!(grads.grad_input.data(), &[0.5]);
        assert_eq!(grads.grad_bias.data(), &[2.0]);
    }
}

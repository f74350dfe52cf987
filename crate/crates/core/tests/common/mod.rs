//! Shared test oracles: 64-bit reference forward implementations
//! (independent nested-loop formulations) and finite-difference gradient
//! checks against the production backward passes.

use olconv_core::nn::{
    self, conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool_backward,
    maxpool_forward, relu_backward, relu_forward, softmax, tansig, tansig_backward, LayerSpec,
    Padding, TensorBuffer,
};
use olconv_core::rng::SplitMix64;

/// Central finite-difference step, evaluated in 64-bit arithmetic.
pub const FD_STEP: f64 = 1e-3;

/// 64-bit reference implementations, written as direct summations with no
/// shared code with the production kernels.
pub mod refnn {
    /// Quadruple-nested-loop cross-correlation.
    #[allow(clippy::too_many_arguments)]
    pub fn conv2d(
        input: &[f64],
        h: usize,
        w: usize,
        cin: usize,
        weights: &[f64],
        kh: usize,
        kw: usize,
        cout: usize,
        bias: &[f64],
        same: bool,
    ) -> (Vec<f64>, usize, usize) {
        let (out_h, out_w, pad_top, pad_left) = if same {
            (h, w, (kh - 1) / 2, (kw - 1) / 2)
        } else {
            (h - kh + 1, w - kw + 1, 0, 0)
        };
        let mut out = vec![0.0f64; out_h * out_w * cout];
        for oy in 0..out_h {
            for ox in 0..out_w {
                for co in 0..cout {
                    let mut acc = bias[co];
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = oy as i64 + ky as i64 - pad_top as i64;
                            let ix = ox as i64 + kx as i64 - pad_left as i64;
                            if iy < 0 || ix < 0 || iy >= h as i64 || ix >= w as i64 {
                                continue;
                            }
                            for ci in 0..cin {
                                let x = input[(iy as usize * w + ix as usize) * cin + ci];
                                let wv = weights[((ky * kw + kx) * cin + ci) * cout + co];
                                acc += x * wv;
                            }
                        }
                    }
                    out[(oy * out_w + ox) * cout + co] = acc;
                }
            }
        }
        (out, out_h, out_w)
    }

    pub fn dense(x: &[f64], weights: &[f64], n: usize, m: usize, bias: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; m];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = bias[j];
            for (i, &xv) in x.iter().enumerate().take(n) {
                acc += xv * weights[i * m + j];
            }
            *o = acc;
        }
        out
    }

    pub fn relu(x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
    }

    pub fn maxpool(
        x: &[f64],
        h: usize,
        w: usize,
        c: usize,
        window: usize,
        stride: usize,
    ) -> (Vec<f64>, usize, usize) {
        let out_h = (h - window) / stride + 1;
        let out_w = (w - window) / stride + 1;
        let mut out = vec![f64::NEG_INFINITY; out_h * out_w * c];
        for oy in 0..out_h {
            for ox in 0..out_w {
                for ch in 0..c {
                    let mut best = f64::NEG_INFINITY;
                    for dy in 0..window {
                        for dx in 0..window {
                            let v = x[((oy * stride + dy) * w + (ox * stride + dx)) * c + ch];
                            if v > best {
                                best = v;
                            }
                        }
                    }
                    out[(oy * out_w + ox) * c + ch] = best;
                }
            }
        }
        (out, out_h, out_w)
    }

    pub fn tansig(x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| 2.0 / (1.0 + (-2.0 * v).exp()) - 1.0).collect()
    }

    /// Cross-entropy of softmax(scores) against a 1-based label.
    pub fn softmax_ce(scores: &[f64], label: usize) -> f64 {
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
        let p = (scores[label - 1] - max).exp() / total;
        -p.max(1e-12).ln()
    }
}

fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-3)
}

fn random_vec(rng: &mut SplitMix64, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.uniform(lo, hi)).collect()
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

/// Scalar objective used by every finite-difference probe: the projection
/// `sum(out * p)` of the layer output onto a fixed random tensor.
fn project(out: &[f64], p: &[f64]) -> f64 {
    out.iter().zip(p).map(|(a, b)| a * b).sum()
}

/// Gradient check for conv2d over `trials` random instances. Returns the
/// maximum relative error between the production backward and central
/// finite differences of the 64-bit reference forward.
pub fn check_conv_gradients(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let (h, w) = (5 + trial % 2, 5 + (trial / 2) % 2);
        let cin = 1 + trial % 2;
        let cout = 1 + (trial / 3) % 3;
        let k = 1 + 2 * (trial % 2); // 1 or 3
        let same = trial % 3 == 0 && k > 1;
        let input = random_vec(&mut rng, h * w * cin, -1.0, 1.0);
        let weights = random_vec(&mut rng, k * k * cin * cout, -1.0, 1.0);
        let bias = random_vec(&mut rng, cout, -0.5, 0.5);
        let (ref_out, out_h, out_w) = refnn::conv2d(&input, h, w, cin, &weights, k, k, cout, &bias, same);
        let p = random_vec(&mut rng, ref_out.len(), -1.0, 1.0);

        let spec = LayerSpec::Conv {
            kernel_h: k,
            kernel_w: k,
            in_channels: cin,
            out_channels: cout,
            padding: if same { Padding::Same } else { Padding::Valid },
        };
        let t_input = TensorBuffer::from_vec(&[h, w, cin], to_f32(&input)).unwrap();
        let t_weights = TensorBuffer::from_vec(&[k, k, cin, cout], to_f32(&weights)).unwrap();
        let t_p = TensorBuffer::from_vec(&[out_h, out_w, cout], to_f32(&p)).unwrap();
        let grads = conv2d_backward(&t_input, &spec, &t_weights, &t_p).unwrap();

        let loss = |input: &[f64], weights: &[f64], bias: &[f64]| -> f64 {
            let (out, _, _) = refnn::conv2d(input, h, w, cin, weights, k, k, cout, bias, same);
            project(&out, &p)
        };
        let mut probe = |analytic: f64, plus: f64, minus: f64| {
            let fd = (plus - minus) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(analytic, fd));
        };
        for i in 0..input.len() {
            let mut ip = input.clone();
            ip[i] += FD_STEP;
            let mut im = input.clone();
            im[i] -= FD_STEP;
            probe(
                grads.grad_input.data()[i] as f64,
                loss(&ip, &weights, &bias),
                loss(&im, &weights, &bias),
            );
        }
        for i in 0..weights.len() {
            let mut wp = weights.clone();
            wp[i] += FD_STEP;
            let mut wm = weights.clone();
            wm[i] -= FD_STEP;
            probe(
                grads.grad_weights.data()[i] as f64,
                loss(&input, &wp, &bias),
                loss(&input, &wm, &bias),
            );
        }
        for i in 0..bias.len() {
            let mut bp = bias.clone();
            bp[i] += FD_STEP;
            let mut bm = bias.clone();
            bm[i] -= FD_STEP;
            probe(
                grads.grad_bias.data()[i] as f64,
                loss(&input, &weights, &bp),
                loss(&input, &weights, &bm),
            );
        }
    }
    worst
}

/// Gradient check for the dense layer.
pub fn check_dense_gradients(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let n = 3 + trial % 8;
        let m = 2 + trial % 5;
        let x = random_vec(&mut rng, n, -2.0, 2.0);
        let w = random_vec(&mut rng, n * m, -1.0, 1.0);
        let b = random_vec(&mut rng, m, -1.0, 1.0);
        let p = random_vec(&mut rng, m, -1.0, 1.0);

        let t_x = TensorBuffer::from_vec(&[n], to_f32(&x)).unwrap();
        let t_w = TensorBuffer::from_vec(&[n, m], to_f32(&w)).unwrap();
        let t_p = TensorBuffer::from_vec(&[m], to_f32(&p)).unwrap();
        let grads = dense_backward(&t_x, &t_w, &t_p).unwrap();

        let loss = |x: &[f64], w: &[f64], b: &[f64]| project(&refnn::dense(x, w, n, m, b), &p);
        for i in 0..n {
            let mut xp = x.clone();
            xp[i] += FD_STEP;
            let mut xm = x.clone();
            xm[i] -= FD_STEP;
            let fd = (loss(&xp, &w, &b) - loss(&xm, &w, &b)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grads.grad_input.data()[i] as f64, fd));
        }
        for i in 0..n * m {
            let mut wp = w.clone();
            wp[i] += FD_STEP;
            let mut wm = w.clone();
            wm[i] -= FD_STEP;
            let fd = (loss(&x, &wp, &b) - loss(&x, &wm, &b)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grads.grad_weights.data()[i] as f64, fd));
        }
        for i in 0..m {
            let mut bp = b.clone();
            bp[i] += FD_STEP;
            let mut bm = b.clone();
            bm[i] -= FD_STEP;
            let fd = (loss(&x, &w, &bp) - loss(&x, &w, &bm)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grads.grad_bias.data()[i] as f64, fd));
        }
    }
    worst
}

/// Gradient check for ReLU on inputs bounded away from the kink.
pub fn check_relu_gradients(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = 16;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let v = rng.uniform(0.05, 2.0);
                if rng.next_f64() < 0.5 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let p = random_vec(&mut rng, n, -1.0, 1.0);
        let t_x = TensorBuffer::from_vec(&[n], to_f32(&x)).unwrap();
        let t_p = TensorBuffer::from_vec(&[n], to_f32(&p)).unwrap();
        let grad = relu_backward(&t_x, &t_p);
        for i in 0..n {
            let mut xp = x.clone();
            xp[i] += FD_STEP;
            let mut xm = x.clone();
            xm[i] -= FD_STEP;
            let fd = (project(&refnn::relu(&xp), &p) - project(&refnn::relu(&xm), &p))
                / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grad.data()[i] as f64, fd));
        }
    }
    worst
}

/// Gradient check for max pooling on inputs with well-separated values.
pub fn check_maxpool_gradients(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let (h, w, c) = (5, 5, 1 + trial % 2);
        let (window, stride) = if trial % 2 == 0 { (2, 1) } else { (3, 2) };
        // Distinct values separated by more than 2 * FD_STEP keep the
        // argmax stable under perturbation.
        let mut values: Vec<f64> = (0..h * w * c).map(|i| i as f64 * 0.01).collect();
        rng.shuffle(&mut values);
        let (_, out_h, out_w) = refnn::maxpool(&values, h, w, c, window, stride);
        let p = random_vec(&mut rng, out_h * out_w * c, -1.0, 1.0);

        let t_x = TensorBuffer::from_vec(&[h, w, c], to_f32(&values)).unwrap();
        let t_p = TensorBuffer::from_vec(&[out_h, out_w, c], to_f32(&p)).unwrap();
        let (_, argmax) = maxpool_forward(&t_x, window, stride).unwrap();
        let grad = maxpool_backward(&argmax, &t_p, &[h, w, c]).unwrap();

        for i in 0..values.len() {
            let mut xp = values.clone();
            xp[i] += FD_STEP;
            let mut xm = values.clone();
            xm[i] -= FD_STEP;
            let fd = (project(&refnn::maxpool(&xp, h, w, c, window, stride).0, &p)
                - project(&refnn::maxpool(&xm, h, w, c, window, stride).0, &p))
                / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grad.data()[i] as f64, fd));
        }
    }
    worst
}

/// Gradient check for tansig.
pub fn check_tansig_gradients(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = 16;
        let x = random_vec(&mut rng, n, -3.0, 3.0);
        let p = random_vec(&mut rng, n, -1.0, 1.0);
        let t_x = TensorBuffer::from_vec(&[n], to_f32(&x)).unwrap();
        let t_p = TensorBuffer::from_vec(&[n], to_f32(&p)).unwrap();
        let y = tansig(&t_x);
        let grad = tansig_backward(&y, &t_p);
        for i in 0..n {
            let mut xp = x.clone();
            xp[i] += FD_STEP;
            let mut xm = x.clone();
            xm[i] -= FD_STEP;
            let fd = (project(&refnn::tansig(&xp), &p) - project(&refnn::tansig(&xm), &p))
                / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grad.data()[i] as f64, fd));
        }
    }
    worst
}

/// Gradient check for the softmax + cross-entropy head: the analytic
/// score gradient `p - onehot` against finite differences of the
/// reference loss.
pub fn check_softmax_ce_gradients(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let k = 3 + trial % 4;
        let scores = random_vec(&mut rng, k, -2.0, 2.0);
        let label = 1 + rng.next_index(k);
        let t_scores = TensorBuffer::from_vec(&[k], to_f32(&scores)).unwrap();
        let probs = softmax(&t_scores);
        let grad = nn::softmax_cross_entropy_grad(&probs, label).unwrap();
        for i in 0..k {
            let mut sp = scores.clone();
            sp[i] += FD_STEP;
            let mut sm = scores.clone();
            sm[i] -= FD_STEP;
            let fd =
                (refnn::softmax_ce(&sp, label) - refnn::softmax_ce(&sm, label)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(grad.data()[i] as f64, fd));
        }
    }
    worst
}

/// Forward agreement between production conv2d (32-bit storage) and the
/// 64-bit nested-loop oracle on random real-valued inputs; returns the
/// maximum absolute difference.
pub fn conv_forward_oracle_gap(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let (h, w) = (6, 6);
        let cin = 1 + trial % 3;
        let cout = 1 + (trial / 2) % 4;
        let k = [1, 3, 5][trial % 3];
        let same = trial % 4 == 0 && k > 1;
        let input = random_vec(&mut rng, h * w * cin, -1.0, 1.0);
        let weights = random_vec(&mut rng, k * k * cin * cout, -1.0, 1.0);
        let bias = random_vec(&mut rng, cout, -0.5, 0.5);
        let (ref_out, out_h, out_w) =
            refnn::conv2d(&input, h, w, cin, &weights, k, k, cout, &bias, same);
        let spec = LayerSpec::Conv {
            kernel_h: k,
            kernel_w: k,
            in_channels: cin,
            out_channels: cout,
            padding: if same { Padding::Same } else { Padding::Valid },
        };
        let out = conv2d_forward(
            &TensorBuffer::from_vec(&[h, w, cin], to_f32(&input)).unwrap(),
            &spec,
            &TensorBuffer::from_vec(&[k, k, cin, cout], to_f32(&weights)).unwrap(),
            &TensorBuffer::from_vec(&[cout], to_f32(&bias)).unwrap(),
        )
        .unwrap();
        assert_eq!(out.shape(), &[out_h, out_w, cout]);
        for (got, want) in out.data().iter().zip(&ref_out) {
            worst = worst.max((*got as f64 - want).abs());
        }
    }
    worst
}

/// Same comparison on small-integer inputs, where both number formats are
/// exact: production output must equal the 64-bit oracle bit-for-bit.
pub fn conv_forward_exact_on_integers(trials: usize, seed: u64) -> bool {
    let mut rng = SplitMix64::new(seed);
    for trial in 0..trials {
        let (h, w) = (6, 6);
        let cin = 1 + trial % 2;
        let cout = 1 + trial % 3;
        let k = 3;
        let int = |rng: &mut SplitMix64| (rng.next_index(17) as f64) - 8.0;
        let input: Vec<f64> = (0..h * w * cin).map(|_| int(&mut rng)).collect();
        let weights: Vec<f64> = (0..k * k * cin * cout).map(|_| int(&mut rng)).collect();
        let bias: Vec<f64> = (0..cout).map(|_| int(&mut rng)).collect();
        let (ref_out, _, _) = refnn::conv2d(&input, h, w, cin, &weights, k, k, cout, &bias, false);
        let spec = LayerSpec::Conv {
            kernel_h: k,
            kernel_w: k,
            in_channels: cin,
            out_channels: cout,
            padding: Padding::Valid,
        };
        let out = conv2d_forward(
            &TensorBuffer::from_vec(&[h, w, cin], to_f32(&input)).unwrap(),
            &spec,
            &TensorBuffer::from_vec(&[k, k, cin, cout], to_f32(&weights)).unwrap(),
            &TensorBuffer::from_vec(&[cout], to_f32(&bias)).unwrap(),
        )
        .unwrap();
        for (got, want) in out.data().iter().zip(&ref_out) {
            if *got as f64 != *want {
                return false;
            }
        }
    }
    true
}

/// Forward agreement for every other layer type against its reference.
pub fn forward_reference_gap(trials: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = 12;
        let x = random_vec(&mut rng, n, -3.0, 3.0);
        let t_x = TensorBuffer::from_vec(&[n], to_f32(&x)).unwrap();
        for (got, want) in relu_forward(&t_x).data().iter().zip(refnn::relu(&x)) {
            worst = worst.max((*got as f64 - want).abs());
        }
        for (got, want) in tansig(&t_x).data().iter().zip(refnn::tansig(&x)) {
            worst = worst.max((*got as f64 - want).abs());
        }
        let w = random_vec(&mut rng, n * 5, -1.0, 1.0);
        let b = random_vec(&mut rng, 5, -1.0, 1.0);
        let y = dense_forward(
            &t_x,
            &TensorBuffer::from_vec(&[n, 5], to_f32(&w)).unwrap(),
            &TensorBuffer::from_vec(&[5], to_f32(&b)).unwrap(),
        )
        .unwrap();
        for (got, want) in y.data().iter().zip(refnn::dense(&x, &w, n, 5, &b)) {
            worst = worst.max((*got as f64 - want).abs());
        }
    }
    worst
}

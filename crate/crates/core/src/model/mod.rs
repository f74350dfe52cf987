//! The shallow convolutional backbone, the fused-feature MLP head, and
//! the training regimes that tie them together.

mod checkpoint;
mod fuse;
mod train;

pub use checkpoint::{
    load_cnn_checkpoint, load_mlp_checkpoint, save_cnn_checkpoint, save_mlp_checkpoint,
};
pub use fuse::{fuse, OlStats};
pub use train::{
    cnn_scores, evaluate_models, extract_cnn_features, mlp_scores, prepare, sweep, train_cnn,
    train_end2end, train_stagewise, write_sweep_csv, EndToEndOutcome, EpochLog, EvalOutcome,
    PreparedDataset, PreparedSample, SplitPlan, StagewiseOutcome, SweepRow, TrainedCnn,
};

use crate::dataset::NUM_CLASSES;
use crate::nn::{
    self, conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool_backward,
    maxpool_forward, relu_backward, relu_forward, softmax, LayerSpec, Padding, TensorBuffer,
};
use crate::rng::{self};
use crate::segment::PATCH_SIZE;
use crate::{Error, Result};

/// Learning-rate / epoch / batch / seed bundle for one training phase.
/// `epochs = 0` is accepted and returns the initialized model unchanged.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f32,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Reference defaults: lr 1e-4, 100 epochs, batch 64.
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            epochs: 100,
            batch_size: 64,
            seed,
        }
    }

    /// `allow_frozen` permits a zero learning rate, which freezes the
    /// phase (used to disable a branch without restructuring a run).
    fn validate(&self, allow_frozen: bool) -> Result<()> {
        let lr_ok = if allow_frozen {
            self.learning_rate >= 0.0
        } else {
            self.learning_rate > 0.0
        };
        if !lr_ok || !self.learning_rate.is_finite() {
            return Err(Error::Argument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 1 {
            return Err(Error::Argument("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which of the training regimes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    CnnOnly,
    Stagewise,
    EndToEnd,
}

impl TrainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::CnnOnly => "cnn_only",
            TrainMode::Stagewise => "stagewise",
            TrainMode::EndToEnd => "end2end",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "cnn_only" => TrainMode::CnnOnly,
            "stagewise" => TrainMode::Stagewise,
            "end2end" => TrainMode::EndToEnd,
            _ => return None,
        })
    }
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: TrainMode,
    pub cnn: TrainConfig,
    pub mlp: TrainConfig,
    /// Number of convolutional layers (1..=4); 3 is the canonical depth.
    pub conv_depth: usize,
    /// When false, the MLP branch stays inactive even in the combined
    /// modes, leaving only the backbone's softmax output.
    pub branch_switch: bool,
    /// Alternative end-to-end composition: the MLP loss gradient also
    /// flows back through the feature tap into the convolution stack.
    pub shared_gradient: bool,
}

impl ExperimentConfig {
    pub fn new(mode: TrainMode, seed: u64) -> Self {
        ExperimentConfig {
            mode,
            cnn: TrainConfig::new(seed),
            mlp: TrainConfig::new(seed),
            conv_depth: 3,
            branch_switch: true,
            shared_gradient: false,
        }
    }
}

/// Hidden width of the MLP head.
pub const MLP_HIDDEN: usize = 10;

/// Flattened feature length of the canonical depth-3 backbone.
pub const CNN3L_FEATURE_LEN: usize = 48_400;

/// Convolution parameter count of the canonical depth-3 backbone.
pub const CNN3L_CONV_PARAMS: usize = 97_750;

/// Commonly quoted approximate total parameter count for this
/// architecture. Not achievable together with the 48,400-length feature
/// tap; construction logs the discrepancy and reports the true count.
pub const NOMINAL_TOTAL_PARAMS_APPROX: usize = 118_000;

/// One convolution layer: spec plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub spec: LayerSpec,
    pub weights: TensorBuffer,
    pub bias: TensorBuffer,
}

/// The convolutional backbone: `depth` conv+ReLU stages (first one
/// unpadded, the rest size-preserving), a single max-pool (window 2,
/// stride 1) whose flattened output is the feature tap, and a dense
/// softmax head over the four classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Cnn3lModel {
    pub convs: Vec<ConvLayer>,
    pub pool_window: usize,
    pub pool_stride: usize,
    pub dense_weights: TensorBuffer,
    pub dense_bias: TensorBuffer,
    /// Side length of the (square) activation entering the pool.
    pub pre_pool_side: usize,
    /// Flattened length of the pooled feature tap.
    pub feature_len: usize,
}

/// Channel schedule prefix; depth 4 extends with a second 100.
const CHANNEL_SCHEDULE: [usize; 4] = [100, 50, 100, 100];
const KERNEL_SCHEDULE: [usize; 4] = [5, 3, 3, 3];

impl Cnn3lModel {
    /// Canonical three-layer backbone. Asserts the 48,400 feature length
    /// and the 97,750 conv-parameter count.
    pub fn new(seed: u64) -> Self {
        let model = Self::with_depth(3, seed).expect("depth 3 is valid");
        assert_eq!(model.feature_len, CNN3L_FEATURE_LEN);
        assert_eq!(model.conv_param_count(), CNN3L_CONV_PARAMS);
        model
    }

    /// Backbone with 1..=4 conv layers, Glorot-initialized from the seed.
    pub fn with_depth(depth: usize, seed: u64) -> Result<Self> {
        if !(1..=4).contains(&depth) {
            return Err(Error::Argument(format!(
                "conv depth must be in 1..=4, got {depth}"
            )));
        }
        let mut rng = rng::stream(seed, rng::tags::CNN_INIT);
        let mut convs = Vec::with_capacity(depth);
        let mut in_channels = 3usize;
        let mut side = PATCH_SIZE;
        for layer in 0..depth {
            let out_channels = CHANNEL_SCHEDULE[layer];
            let k = KERNEL_SCHEDULE[layer];
            let padding = if layer == 0 { Padding::Valid } else { Padding::Same };
            if padding == Padding::Valid {
                side = side - k + 1;
            }
            let spec = LayerSpec::Conv {
                kernel_h: k,
                kernel_w: k,
                in_channels,
                out_channels,
                padding,
            };
            let fan_in = k * k * in_channels;
            let fan_out = k * k * out_channels;
            let weights =
                nn::init::glorot_uniform(&[k, k, in_channels, out_channels], fan_in, fan_out, &mut rng);
            convs.push(ConvLayer {
                spec,
                weights,
                bias: TensorBuffer::zeros(&[out_channels]),
            });
            in_channels = out_channels;
        }
        let pool_window = 2;
        let pool_stride = 1;
        let pooled_side = (side - pool_window) / pool_stride + 1;
        let feature_len = pooled_side * pooled_side * in_channels;
        let dense_weights = nn::init::glorot_uniform(
            &[feature_len, NUM_CLASSES],
            feature_len,
            NUM_CLASSES,
            &mut rng,
        );
        Ok(Cnn3lModel {
            convs,
            pool_window,
            pool_stride,
            dense_weights,
            dense_bias: TensorBuffer::zeros(&[NUM_CLASSES]),
            pre_pool_side: side,
            feature_len,
        })
    }

    pub fn conv_param_count(&self) -> usize {
        self.convs
            .iter()
            .map(|c| c.weights.len() + c.bias.len())
            .sum()
    }

    pub fn total_param_count(&self) -> usize {
        self.conv_param_count() + self.dense_weights.len() + self.dense_bias.len()
    }

    /// Human-readable note about the nominal-vs-actual parameter count.
    pub fn parameter_count_notice(&self) -> String {
        format!(
            "notice=parameter_count conv={} total={} nominal_approx={} (nominal figure is not \
             achievable together with the {}-length feature tap; the true count is reported)",
            self.conv_param_count(),
            self.total_param_count(),
            NOMINAL_TOTAL_PARAMS_APPROX,
            self.feature_len
        )
    }

    /// Forward to the flattened pooled features, keeping every
    /// intermediate needed by the backward pass.
    pub fn forward_features(&self, input: &TensorBuffer) -> Result<FeatureForward> {
        let mut conv_inputs = Vec::with_capacity(self.convs.len() + 1);
        let mut conv_pre = Vec::with_capacity(self.convs.len());
        conv_inputs.push(input.clone());
        let mut current = input.clone();
        for conv in &self.convs {
            let pre = conv2d_forward(&current, &conv.spec, &conv.weights, &conv.bias)?;
            current = relu_forward(&pre);
            conv_pre.push(pre);
            conv_inputs.push(current.clone());
        }
        let (pooled, argmax) = maxpool_forward(&current, self.pool_window, self.pool_stride)?;
        let features = pooled.flattened();
        Ok(FeatureForward {
            conv_inputs,
            conv_pre,
            pool_argmax: argmax,
            features,
        })
    }

    /// Full forward pass through the softmax head.
    pub fn forward(&self, input: &TensorBuffer) -> Result<CnnForward> {
        let feat = self.forward_features(input)?;
        let logits = dense_forward(&feat.features, &self.dense_weights, &self.dense_bias)?;
        let probabilities = softmax(&logits);
        Ok(CnnForward {
            feat,
            probabilities,
        })
    }

    /// Gradients of the feature-path parameters (and nothing else) given
    /// the gradient of a scalar loss with respect to the flattened
    /// features. Shared by the softmax-head backward and the
    /// shared-gradient end-to-end variant.
    pub fn backward_from_features(
        &self,
        feat: &FeatureForward,
        grad_features: &TensorBuffer,
    ) -> Result<Vec<TensorBuffer>> {
        let last_relu = feat.conv_inputs.last().expect("forward ran");
        let grad_pool = maxpool_backward(&feat.pool_argmax, grad_features, last_relu.shape())?;
        let mut grad = grad_pool;
        let mut conv_grads_rev = Vec::with_capacity(self.convs.len() * 2);
        for (i, conv) in self.convs.iter().enumerate().rev() {
            let grad_pre = relu_backward(&feat.conv_pre[i], &grad);
            let grads = conv2d_backward(&feat.conv_inputs[i], &conv.spec, &conv.weights, &grad_pre)?;
            conv_grads_rev.push(grads.grad_bias);
            conv_grads_rev.push(grads.grad_weights);
            grad = grads.grad_input;
        }
        conv_grads_rev.reverse();
        Ok(conv_grads_rev)
    }

    /// Loss and gradients for one sample: cross-entropy on the softmax
    /// head. Gradient order matches [`Cnn3lModel::params_mut`].
    pub fn backward(&self, fwd: &CnnForward, label: u8) -> Result<(Vec<TensorBuffer>, f64)> {
        let loss = nn::cross_entropy(&fwd.probabilities, label as usize)?;
        let grad_scores = nn::softmax_cross_entropy_grad(&fwd.probabilities, label as usize)?;
        let dense = dense_backward(&fwd.feat.features, &self.dense_weights, &grad_scores)?;
        let mut grads = self.backward_from_features(&fwd.feat, &dense.grad_input)?;
        grads.push(dense.grad_weights);
        grads.push(dense.grad_bias);
        Ok((grads, loss))
    }

    /// Parameter tensors in declaration order (conv weights/bias pairs,
    /// then the dense head).
    pub fn params_mut(&mut self) -> Vec<&mut TensorBuffer> {
        let mut params = Vec::with_capacity(self.convs.len() * 2 + 2);
        for conv in &mut self.convs {
            params.push(&mut conv.weights);
            params.push(&mut conv.bias);
        }
        params.push(&mut self.dense_weights);
        params.push(&mut self.dense_bias);
        params
    }

    pub fn params(&self) -> Vec<&TensorBuffer> {
        let mut params = Vec::with_capacity(self.convs.len() * 2 + 2);
        for conv in &self.convs {
            params.push(&conv.weights);
            params.push(&conv.bias);
        }
        params.push(&self.dense_weights);
        params.push(&self.dense_bias);
        params
    }
}

/// Cached activations of a feature-path forward pass.
#[derive(Debug, Clone)]
pub struct FeatureForward {
    /// `[0]` is the input; `[i + 1]` is the ReLU output of conv `i`.
    pub conv_inputs: Vec<TensorBuffer>,
    /// Pre-ReLU conv outputs.
    pub conv_pre: Vec<TensorBuffer>,
    pub pool_argmax: Vec<usize>,
    /// Flattened pooled activations.
    pub features: TensorBuffer,
}

/// Cached activations of a full forward pass.
#[derive(Debug, Clone)]
pub struct CnnForward {
    pub feat: FeatureForward,
    pub probabilities: TensorBuffer,
}

/// The MLP head over fused features: dense → tansig(10) → dense → softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub w1: TensorBuffer,
    pub b1: TensorBuffer,
    pub w2: TensorBuffer,
    pub b2: TensorBuffer,
}

impl MlpModel {
    pub fn new(in_dim: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, rng::tags::MLP_INIT);
        MlpModel {
            w1: nn::init::glorot_uniform(&[in_dim, MLP_HIDDEN], in_dim, MLP_HIDDEN, &mut rng),
            b1: TensorBuffer::zeros(&[MLP_HIDDEN]),
            w2: nn::init::glorot_uniform(&[MLP_HIDDEN, NUM_CLASSES], MLP_HIDDEN, NUM_CLASSES, &mut rng),
            b2: TensorBuffer::zeros(&[NUM_CLASSES]),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w1.shape()[0]
    }

    pub fn forward(&self, input: &TensorBuffer) -> Result<MlpForward> {
        let hidden_pre = dense_forward(input, &self.w1, &self.b1)?;
        let hidden = nn::tansig(&hidden_pre);
        let logits = dense_forward(&hidden, &self.w2, &self.b2)?;
        let probabilities = softmax(&logits);
        Ok(MlpForward {
            hidden,
            probabilities,
        })
    }

    /// Loss, parameter gradients (w1, b1, w2, b2), and the gradient with
    /// respect to the input vector.
    pub fn backward(
        &self,
        input: &TensorBuffer,
        fwd: &MlpForward,
        label: u8,
    ) -> Result<(Vec<TensorBuffer>, TensorBuffer, f64)> {
        let loss = nn::cross_entropy(&fwd.probabilities, label as usize)?;
        let grad_scores = nn::softmax_cross_entropy_grad(&fwd.probabilities, label as usize)?;
        let d2 = dense_backward(&fwd.hidden, &self.w2, &grad_scores)?;
        let grad_hidden_pre = nn::tansig_backward(&fwd.hidden, &d2.grad_input);
        let d1 = dense_backward(input, &self.w1, &grad_hidden_pre)?;
        Ok((
            vec![d1.grad_weights, d1.grad_bias, d2.grad_weights, d2.grad_bias],
            d1.grad_input,
            loss,
        ))
    }

    pub fn params_mut(&mut self) -> Vec<&mut TensorBuffer> {
        vec![&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn params(&self) -> Vec<&TensorBuffer> {
        vec![&self.w1, &self.b1, &self.w2, &self.b2]
    }
}

/// Cached activations of an MLP forward pass.
#[derive(Debug, Clone)]
pub struct MlpForward {
    pub hidden: TensorBuffer,
    pub probabilities: TensorBuffer,
}

/// Deterministic helper used by the gradient-descent loops: accumulate
/// per-sample gradients in 64-bit in sample order, then average.
pub(crate) struct GradAccumulator {
    sums: Vec<Vec<f64>>,
    count: usize,
}

impl GradAccumulator {
    pub fn new(shapes: &[&TensorBuffer]) -> Self {
        GradAccumulator {
            sums: shapes.iter().map(|t| vec![0.0f64; t.len()]).collect(),
            count: 0,
        }
    }

    pub fn add(&mut self, grads: &[TensorBuffer]) {
        debug_assert_eq!(grads.len(), self.sums.len());
        for (sum, grad) in self.sums.iter_mut().zip(grads) {
            for (s, &g) in sum.iter_mut().zip(grad.data()) {
                *s += g as f64;
            }
        }
        self.count += 1;
    }

    /// Mean gradients as 32-bit tensors shaped like the parameters.
    pub fn mean(&self, params: &[&TensorBuffer]) -> Vec<TensorBuffer> {
        let n = self.count.max(1) as f64;
        self.sums
            .iter()
            .zip(params)
            .map(|(sum, p)| {
                let data: Vec<f32> = sum.iter().map(|&v| (v / n) as f32).collect();
                TensorBuffer::from_vec(p.shape(), data).expect("shape matches")
            })
            .collect()
    }
}

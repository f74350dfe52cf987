//! Training loops: CNN-only, stagewise, and end-to-end, plus dataset
//! preparation and the hyperparameter sweep.
//!
//! Determinism contract: batches are visited in an order drawn from the
//! seed, per-sample work may run in parallel, and gradient reduction
//! always happens sequentially in sample order, so a seed reproduces a
//! run bit-for-bit.

use super::{Cnn3lModel, ExperimentConfig, GradAccumulator, MlpModel, OlStats, TrainConfig};
use crate::dataset::{apply_mean_subtract, compute_mean_image_of, DatasetManifest, Split};
use crate::metrics::{self, MetricsReport};
use crate::nn::{sgd_step, TensorBuffer};
use crate::olfeat::{self, OL_FEATURE_COUNT};
use crate::rng::{self};
use crate::{Error, Result};
use rayon::prelude::*;

/// A mean-subtracted patch ready for the network, with its label and
/// object-level feature vector.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    pub tensor: TensorBuffer,
    pub label: u8,
    pub ol: [f64; OL_FEATURE_COUNT],
    /// Index into the source manifest's sample list.
    pub manifest_index: usize,
}

/// Which manifest splits play the train/val/test roles for a run.
#[derive(Debug, Clone, Copy)]
pub struct SplitPlan {
    pub train: Split,
    pub val: Option<Split>,
    pub test: Split,
}

impl SplitPlan {
    /// The 0.7 / 0.15 / 0.15 layout.
    pub fn standard() -> Self {
        SplitPlan {
            train: Split::Train,
            val: Some(Split::Val),
            test: Split::Test,
        }
    }

    /// Train on one fold, test on the other.
    pub fn folds(train: Split, test: Split) -> Self {
        SplitPlan {
            train,
            val: None,
            test,
        }
    }
}

/// Tensors, labels, and normalization statistics for one run. The mean
/// image and the object-level statistics are always fitted on the plan's
/// training role only.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub train: Vec<PreparedSample>,
    pub val: Vec<PreparedSample>,
    pub test: Vec<PreparedSample>,
    pub mean_image: Vec<f32>,
    pub ol_stats: OlStats,
}

fn prepare_split(
    manifest: &DatasetManifest,
    split: Split,
    mean_image: &[f32],
) -> Vec<PreparedSample> {
    let indices: Vec<usize> = manifest
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.split == split)
        .map(|(i, _)| i)
        .collect();
    indices
        .par_iter()
        .map(|&i| {
            let s = &manifest.samples[i];
            PreparedSample {
                tensor: apply_mean_subtract(&s.patch, mean_image),
                label: s.label,
                ol: olfeat::extract_ol(&s.patch).vector.to_array(),
                manifest_index: i,
            }
        })
        .collect()
}

/// Mean-subtract every sample of the plan's splits and fit the
/// object-level z-score statistics on the training role.
pub fn prepare(manifest: &DatasetManifest, plan: SplitPlan) -> Result<PreparedDataset> {
    let mean_image = compute_mean_image_of(manifest, plan.train)?;
    let train = prepare_split(manifest, plan.train, &mean_image);
    let val = match plan.val {
        Some(split) => prepare_split(manifest, split, &mean_image),
        None => Vec::new(),
    };
    let test = prepare_split(manifest, plan.test, &mean_image);
    if test.is_empty() {
        return Err(Error::State(format!(
            "no samples in test split {:?}",
            plan.test
        )));
    }
    let ol_vectors: Vec<[f64; OL_FEATURE_COUNT]> = train.iter().map(|s| s.ol).collect();
    let ol_stats = OlStats::fit(&ol_vectors);
    Ok(PreparedDataset {
        train,
        val,
        test,
        mean_image,
        ol_stats,
    })
}

/// One row of the per-epoch training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub phase: &'static str,
    pub loss: f64,
    pub accuracy: f64,
}

/// A trained backbone with its per-epoch log.
#[derive(Debug, Clone)]
pub struct TrainedCnn {
    pub model: Cnn3lModel,
    pub log: Vec<EpochLog>,
}

fn argmax_f32(values: &[f32]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Sub-chunk width for parallel gradient computation: keeps the set of
/// in-flight per-sample gradient tensors small while the reduction still
/// runs in sample order.
const REDUCE_CHUNK: usize = 16;

/// Per-sample forward/backward over one batch, reduced in sample order.
/// Returns mean gradients, the summed loss, and the correct-prediction
/// count.
fn cnn_batch_grads(
    model: &Cnn3lModel,
    batch: &[&PreparedSample],
) -> Result<(Vec<TensorBuffer>, f64, usize)> {
    let params = model.params();
    let mut acc = GradAccumulator::new(&params);
    let mut loss_sum = 0.0f64;
    let mut correct = 0usize;
    for sub in batch.chunks(REDUCE_CHUNK) {
        let per_sample: Vec<(Vec<TensorBuffer>, f64, bool)> = sub
            .par_iter()
            .map(|s| {
                let fwd = model.forward(&s.tensor)?;
                let correct = argmax_f32(fwd.probabilities.data()) == (s.label - 1) as usize;
                let (grads, loss) = model.backward(&fwd, s.label)?;
                Ok((grads, loss, correct))
            })
            .collect::<Result<Vec<_>>>()?;
        for (grads, loss, ok) in &per_sample {
            acc.add(grads);
            loss_sum += loss;
            correct += usize::from(*ok);
        }
    }
    Ok((acc.mean(&params), loss_sum, correct))
}

fn apply_grads(params: Vec<&mut TensorBuffer>, grads: &[TensorBuffer], lr: f32) -> Result<()> {
    for (param, grad) in params.into_iter().zip(grads) {
        sgd_step(param, grad, lr)?;
    }
    Ok(())
}

fn check_finite(loss_sum: f64, epoch: usize, batch: usize) -> Result<()> {
    if loss_sum.is_finite() {
        Ok(())
    } else {
        Err(Error::Training {
            epoch,
            batch,
            message: "non-finite loss".into(),
        })
    }
}

fn run_cnn_training(
    data: &PreparedDataset,
    cfg: &TrainConfig,
    depth: usize,
    mut per_epoch: impl FnMut(usize, &Cnn3lModel),
) -> Result<TrainedCnn> {
    cfg.validate(false)?;
    let mut model = if depth == 3 {
        Cnn3lModel::new(cfg.seed)
    } else {
        Cnn3lModel::with_depth(depth, cfg.seed)?
    };
    let mut shuffle_rng = rng::stream(cfg.seed, rng::tags::EPOCH_SHUFFLE);
    let mut log = Vec::with_capacity(cfg.epochs);
    let n = data.train.len();
    if n == 0 {
        return Err(Error::State("empty training split".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&PreparedSample> = chunk.iter().map(|&i| &data.train[i]).collect();
            let (grads, batch_loss, batch_correct) = cnn_batch_grads(&model, &batch)?;
            check_finite(batch_loss, epoch, batch_idx)?;
            apply_grads(model.params_mut(), &grads, cfg.learning_rate)?;
            loss_sum += batch_loss;
            correct += batch_correct;
        }
        log.push(EpochLog {
            epoch,
            phase: "cnn",
            loss: loss_sum / n as f64,
            accuracy: correct as f64 / n as f64,
        });
        per_epoch(epoch, &model);
    }
    Ok(TrainedCnn { model, log })
}

/// Minibatch SGD on the backbone's softmax cross-entropy (OUTPUT-1 path).
/// `epochs = 0` returns the initialized model unchanged.
pub fn train_cnn(data: &PreparedDataset, cfg: &TrainConfig, depth: usize) -> Result<TrainedCnn> {
    run_cnn_training(data, cfg, depth, |_, _| ())
}

/// Class-probability rows for a set of samples.
pub fn cnn_scores(model: &Cnn3lModel, samples: &[PreparedSample]) -> Result<Vec<[f64; 4]>> {
    samples
        .par_iter()
        .map(|s| {
            let fwd = model.forward(&s.tensor)?;
            let p = fwd.probabilities.data();
            Ok([p[0] as f64, p[1] as f64, p[2] as f64, p[3] as f64])
        })
        .collect()
}

/// Forward every sample to the feature tap; rows are flattened post-pool
/// activations (non-negative by construction).
pub fn extract_cnn_features(
    model: &Cnn3lModel,
    samples: &[PreparedSample],
) -> Result<TensorBuffer> {
    let rows: Vec<Vec<f32>> = samples
        .par_iter()
        .map(|s| Ok(model.forward_features(&s.tensor)?.features.into_data()))
        .collect::<Result<Vec<_>>>()?;
    let dim = model.feature_len;
    let mut data = Vec::with_capacity(rows.len() * dim);
    for row in rows {
        debug_assert_eq!(row.len(), dim);
        data.extend_from_slice(&row);
    }
    TensorBuffer::from_vec(&[samples.len(), dim], data)
}

/// Fused input vectors (CNN block + z-scored object-level block) for a
/// set of samples under a given backbone.
fn fused_inputs(
    model: &Cnn3lModel,
    samples: &[PreparedSample],
    stats: &OlStats,
) -> Result<Vec<TensorBuffer>> {
    samples
        .par_iter()
        .map(|s| {
            let feat = model.forward_features(&s.tensor)?;
            Ok(fuse_raw(feat.features.data(), &s.ol, stats))
        })
        .collect()
}

/// Like [`fuse`] but over an already-extracted raw feature array.
fn fuse_raw(cnn_features: &[f32], ol: &[f64; OL_FEATURE_COUNT], stats: &OlStats) -> TensorBuffer {
    let z = stats.zscore(ol);
    let mut data = Vec::with_capacity(cnn_features.len() + OL_FEATURE_COUNT);
    data.extend_from_slice(cnn_features);
    data.extend(z.iter().map(|&v| v as f32));
    TensorBuffer::from_vec(&[data.len()], data).expect("non-empty")
}

fn mlp_batch_grads(
    mlp: &MlpModel,
    inputs: &[&TensorBuffer],
    labels: &[u8],
) -> Result<(Vec<TensorBuffer>, f64, usize)> {
    let params = mlp.params();
    let mut acc = GradAccumulator::new(&params);
    let mut loss_sum = 0.0f64;
    let mut correct = 0usize;
    for (sub_inputs, sub_labels) in inputs
        .chunks(REDUCE_CHUNK)
        .zip(labels.chunks(REDUCE_CHUNK))
    {
        let per_sample: Vec<(Vec<TensorBuffer>, f64, bool)> = sub_inputs
            .par_iter()
            .zip(sub_labels.par_iter())
            .map(|(input, &label)| {
                let fwd = mlp.forward(input)?;
                let correct = argmax_f32(fwd.probabilities.data()) == (label - 1) as usize;
                let (grads, _, loss) = mlp.backward(input, &fwd, label)?;
                Ok((grads, loss, correct))
            })
            .collect::<Result<Vec<_>>>()?;
        for (grads, loss, ok) in &per_sample {
            acc.add(grads);
            loss_sum += loss;
            correct += usize::from(*ok);
        }
    }
    Ok((acc.mean(&params), loss_sum, correct))
}

fn train_mlp(
    inputs: &[TensorBuffer],
    labels: &[u8],
    cfg: &TrainConfig,
    in_dim: usize,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    cfg.validate(false)?;
    let mut mlp = MlpModel::new(in_dim, cfg.seed);
    let mut shuffle_rng = rng::stream(cfg.seed, rng::tags::MLP_SHUFFLE);
    let n = inputs.len();
    if n == 0 {
        return Err(Error::State("no fused training vectors".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch_inputs: Vec<&TensorBuffer> = chunk.iter().map(|&i| &inputs[i]).collect();
            let batch_labels: Vec<u8> = chunk.iter().map(|&i| labels[i]).collect();
            let (grads, batch_loss, batch_correct) =
                mlp_batch_grads(&mlp, &batch_inputs, &batch_labels)?;
            check_finite(batch_loss, epoch, batch_idx)?;
            apply_grads(mlp.params_mut(), &grads, cfg.learning_rate)?;
            loss_sum += batch_loss;
            correct += batch_correct;
        }
        log.push(EpochLog {
            epoch,
            phase: "mlp",
            loss: loss_sum / n as f64,
            accuracy: correct as f64 / n as f64,
        });
    }
    Ok((mlp, log))
}

/// Probability rows of the MLP head over fused inputs.
pub fn mlp_scores(mlp: &MlpModel, inputs: &[TensorBuffer]) -> Result<Vec<[f64; 4]>> {
    inputs
        .par_iter()
        .map(|input| {
            let fwd = mlp.forward(input)?;
            let p = fwd.probabilities.data();
            Ok([p[0] as f64, p[1] as f64, p[2] as f64, p[3] as f64])
        })
        .collect()
}

/// Outcome of stagewise training (OUTPUT-1 and OUTPUT-2).
#[derive(Debug, Clone)]
pub struct StagewiseOutcome {
    pub cnn: Cnn3lModel,
    pub cnn_log: Vec<EpochLog>,
    /// Backbone softmax metrics on the test role.
    pub cnn_report: MetricsReport,
    pub mlp: Option<MlpModel>,
    pub mlp_log: Vec<EpochLog>,
    /// Fused-feature MLP metrics on the test role.
    pub mlp_report: Option<MetricsReport>,
    pub mean_image: Vec<f32>,
    pub ol_stats: OlStats,
}

/// Train the backbone, freeze it, extract and fuse features, train the
/// MLP on the fused vectors, and evaluate both heads on the test role.
pub fn train_stagewise(
    manifest: &DatasetManifest,
    plan: SplitPlan,
    cfg: &ExperimentConfig,
) -> Result<StagewiseOutcome> {
    let data = prepare(manifest, plan)?;
    let trained = train_cnn(&data, &cfg.cnn, cfg.conv_depth)?;
    let test_labels: Vec<u8> = data.test.iter().map(|s| s.label).collect();
    let cnn_report = metrics::evaluate(&cnn_scores(&trained.model, &data.test)?, &test_labels)?;

    if !cfg.branch_switch {
        return Ok(StagewiseOutcome {
            cnn: trained.model,
            cnn_log: trained.log,
            cnn_report,
            mlp: None,
            mlp_log: Vec::new(),
            mlp_report: None,
            mean_image: data.mean_image,
            ol_stats: data.ol_stats,
        });
    }

    // The backbone is frozen from here on: only read access below.
    let train_inputs = fused_inputs(&trained.model, &data.train, &data.ol_stats)?;
    let train_labels: Vec<u8> = data.train.iter().map(|s| s.label).collect();
    let (mlp, mlp_log) = train_mlp(
        &train_inputs,
        &train_labels,
        &cfg.mlp,
        trained.model.feature_len + OL_FEATURE_COUNT,
    )?;
    let test_inputs = fused_inputs(&trained.model, &data.test, &data.ol_stats)?;
    let mlp_report = metrics::evaluate(&mlp_scores(&mlp, &test_inputs)?, &test_labels)?;

    Ok(StagewiseOutcome {
        cnn: trained.model,
        cnn_log: trained.log,
        cnn_report,
        mlp: Some(mlp),
        mlp_log,
        mlp_report: Some(mlp_report),
        mean_image: data.mean_image,
        ol_stats: data.ol_stats,
    })
}

/// Outcome of end-to-end training.
#[derive(Debug, Clone)]
pub struct EndToEndOutcome {
    pub cnn: Cnn3lModel,
    pub mlp: Option<MlpModel>,
    /// Interleaved per-epoch rows: one `cnn` row and (when the branch is
    /// active) one `mlp` row per epoch.
    pub log: Vec<EpochLog>,
    pub cnn_report: MetricsReport,
    pub mlp_report: Option<MetricsReport>,
    pub mean_image: Vec<f32>,
    pub ol_stats: OlStats,
}

/// Interleaved training: per batch, the backbone is updated from its own
/// softmax loss, features are re-extracted from the just-updated
/// backbone, fused, and the MLP is updated from its own loss. The MLP
/// loss does not propagate into the backbone unless `shared_gradient` is
/// set, in which case the feature-path gradient of the MLP loss is
/// applied to the convolution stack as a second update.
pub fn train_end2end(
    manifest: &DatasetManifest,
    plan: SplitPlan,
    cfg: &ExperimentConfig,
) -> Result<EndToEndOutcome> {
    cfg.cnn.validate(false)?;
    cfg.mlp.validate(true)?;
    let data = prepare(manifest, plan)?;
    let mut cnn = if cfg.conv_depth == 3 {
        Cnn3lModel::new(cfg.cnn.seed)
    } else {
        Cnn3lModel::with_depth(cfg.conv_depth, cfg.cnn.seed)?
    };
    let branch_active = cfg.branch_switch;
    let mut mlp = if branch_active {
        Some(MlpModel::new(cnn.feature_len + OL_FEATURE_COUNT, cfg.mlp.seed))
    } else {
        None
    };

    let mut shuffle_rng = rng::stream(cfg.cnn.seed, rng::tags::EPOCH_SHUFFLE);
    let n = data.train.len();
    if n == 0 {
        return Err(Error::State("empty training split".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = Vec::new();

    for epoch in 1..=cfg.cnn.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut cnn_loss_sum = 0.0f64;
        let mut cnn_correct = 0usize;
        let mut mlp_loss_sum = 0.0f64;
        let mut mlp_correct = 0usize;
        for (batch_idx, chunk) in order.chunks(cfg.cnn.batch_size).enumerate() {
            let batch: Vec<&PreparedSample> = chunk.iter().map(|&i| &data.train[i]).collect();

            let (grads, batch_loss, batch_correct) = cnn_batch_grads(&cnn, &batch)?;
            check_finite(batch_loss, epoch, batch_idx)?;
            apply_grads(cnn.params_mut(), &grads, cfg.cnn.learning_rate)?;
            cnn_loss_sum += batch_loss;
            cnn_correct += batch_correct;

            if let Some(mlp_model) = mlp.as_mut() {
                // Re-extract from the just-updated backbone, fuse, and run
                // the MLP's own forward/backward.
                type SampleOut = (Vec<TensorBuffer>, f64, bool, Option<Vec<TensorBuffer>>);
                let mlp_params = mlp_model.params();
                let mut acc = GradAccumulator::new(&mlp_params);
                let conv_params: Vec<&TensorBuffer> = cnn
                    .convs
                    .iter()
                    .flat_map(|c| [&c.weights, &c.bias])
                    .collect();
                let mut conv_acc = cfg
                    .shared_gradient
                    .then(|| GradAccumulator::new(&conv_params));
                let mut batch_mlp_loss = 0.0f64;
                for sub in batch.chunks(REDUCE_CHUNK) {
                    let per_sample: Vec<SampleOut> = sub
                        .par_iter()
                        .map(|s| {
                            let feat = cnn.forward_features(&s.tensor)?;
                            let fused = fuse_raw(feat.features.data(), &s.ol, &data.ol_stats);
                            let fwd = mlp_model.forward(&fused)?;
                            let correct =
                                argmax_f32(fwd.probabilities.data()) == (s.label - 1) as usize;
                            let (grads, grad_input, loss) =
                                mlp_model.backward(&fused, &fwd, s.label)?;
                            let cnn_path = if cfg.shared_gradient {
                                let grad_features = TensorBuffer::from_vec(
                                    &[cnn.feature_len],
                                    grad_input.data()[..cnn.feature_len].to_vec(),
                                )?;
                                Some(cnn.backward_from_features(&feat, &grad_features)?)
                            } else {
                                None
                            };
                            Ok((grads, loss, correct, cnn_path))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    for (grads, loss, ok, cnn_path) in &per_sample {
                        acc.add(grads);
                        batch_mlp_loss += loss;
                        mlp_correct += usize::from(*ok);
                        if let Some(conv_acc) = conv_acc.as_mut() {
                            conv_acc.add(cnn_path.as_ref().expect("shared_gradient set"));
                        }
                    }
                }
                check_finite(batch_mlp_loss, epoch, batch_idx)?;
                mlp_loss_sum += batch_mlp_loss;
                if cfg.mlp.learning_rate > 0.0 {
                    let mean = acc.mean(&mlp_params);
                    apply_grads(mlp_model.params_mut(), &mean, cfg.mlp.learning_rate)?;
                }
                if let Some(conv_acc) = &conv_acc {
                    let mean = conv_acc.mean(&conv_params);
                    let conv_params_mut: Vec<&mut TensorBuffer> = cnn
                        .convs
                        .iter_mut()
                        .flat_map(|c| [&mut c.weights, &mut c.bias])
                        .collect();
                    apply_grads(conv_params_mut, &mean, cfg.cnn.learning_rate)?;
                }
            }
        }
        log.push(EpochLog {
            epoch,
            phase: "cnn",
            loss: cnn_loss_sum / n as f64,
            accuracy: cnn_correct as f64 / n as f64,
        });
        if branch_active {
            log.push(EpochLog {
                epoch,
                phase: "mlp",
                loss: mlp_loss_sum / n as f64,
                accuracy: mlp_correct as f64 / n as f64,
            });
        }
    }

    let test_labels: Vec<u8> = data.test.iter().map(|s| s.label).collect();
    let cnn_report = metrics::evaluate(&cnn_scores(&cnn, &data.test)?, &test_labels)?;
    let mlp_report = match &mlp {
        Some(mlp_model) => {
            let test_inputs = fused_inputs(&cnn, &data.test, &data.ol_stats)?;
            Some(metrics::evaluate(
                &mlp_scores(mlp_model, &test_inputs)?,
                &test_labels,
            )?)
        }
        None => None,
    };

    Ok(EndToEndOutcome {
        cnn,
        mlp,
        log,
        cnn_report,
        mlp_report,
        mean_image: data.mean_image,
        ol_stats: data.ol_stats,
    })
}

/// Scores, labels, and reports produced by [`evaluate_models`].
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub labels: Vec<u8>,
    pub cnn_scores: Vec<[f64; 4]>,
    pub cnn_report: MetricsReport,
    pub mlp_scores: Option<Vec<[f64; 4]>>,
    pub mlp_report: Option<MetricsReport>,
}

/// Re-evaluate saved models on one split of a manifest, using the stored
/// normalization statistics (never recomputed here, so evaluation of a
/// checkpoint is exactly reproducible).
pub fn evaluate_models(
    manifest: &DatasetManifest,
    test: Split,
    mean_image: &[f32],
    ol_stats: &OlStats,
    cnn: &Cnn3lModel,
    mlp: Option<&MlpModel>,
) -> Result<EvalOutcome> {
    let samples = prepare_split(manifest, test, mean_image);
    if samples.is_empty() {
        return Err(Error::State(format!("no samples in split {test:?}")));
    }
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let cnn_scores_v = cnn_scores(cnn, &samples)?;
    let cnn_report = metrics::evaluate(&cnn_scores_v, &labels)?;
    let (mlp_scores_v, mlp_report) = match mlp {
        Some(mlp_model) => {
            let inputs = fused_inputs(cnn, &samples, ol_stats)?;
            let scores = mlp_scores(mlp_model, &inputs)?;
            let report = metrics::evaluate(&scores, &labels)?;
            (Some(scores), Some(report))
        }
        None => (None, None),
    };
    Ok(EvalOutcome {
        labels,
        cnn_scores: cnn_scores_v,
        cnn_report,
        mlp_scores: mlp_scores_v,
        mlp_report,
    })
}

/// One row of the hyperparameter-sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub depth: usize,
    pub learning_rate: f32,
    pub epoch: usize,
    pub train_acc: f64,
    pub val_acc: f64,
}

impl SweepRow {
    /// The configuration tag used in the sweep CSV (`NC1FC_lr...`).
    pub fn config_label(&self) -> String {
        format!("{}C1FC_lr{:e}", self.depth, self.learning_rate)
    }
}

/// Grid sweep over conv depth and learning rate, recording train and
/// validation accuracy per epoch.
pub fn sweep(
    manifest: &DatasetManifest,
    plan: SplitPlan,
    base: &TrainConfig,
    depths: &[usize],
    learning_rates: &[f32],
) -> Result<Vec<SweepRow>> {
    let data = prepare(manifest, plan)?;
    if data.val.is_empty() {
        return Err(Error::State("sweep requires a validation split".into()));
    }
    let val_labels: Vec<u8> = data.val.iter().map(|s| s.label).collect();
    let mut rows = Vec::new();
    for &depth in depths {
        for &lr in learning_rates {
            let cfg = TrainConfig {
                learning_rate: lr,
                ..base.clone()
            };
            let mut grid_rows: Vec<SweepRow> = Vec::with_capacity(cfg.epochs);
            let trained = run_cnn_training(&data, &cfg, depth, |epoch, model| {
                let val_acc = match cnn_scores(model, &data.val) {
                    Ok(scores) => {
                        let predicted = metrics::argmax_labels(&scores);
                        let correct = predicted
                            .iter()
                            .zip(&val_labels)
                            .filter(|(p, t)| p == t)
                            .count();
                        correct as f64 / val_labels.len() as f64
                    }
                    Err(_) => f64::NAN,
                };
                grid_rows.push(SweepRow {
                    depth,
                    learning_rate: lr,
                    epoch,
                    train_acc: f64::NAN, // filled from the log below
                    val_acc,
                });
            })?;
            for (row, log) in grid_rows.iter_mut().zip(&trained.log) {
                row.train_acc = log.accuracy;
            }
            rows.extend(grid_rows);
        }
    }
    Ok(rows)
}

/// Write sweep rows as CSV (`config,epoch,train_acc,val_acc`).
pub fn write_sweep_csv(path: &std::path::Path, rows: &[SweepRow]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "config,epoch,train_acc,val_acc")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.config_label(),
            row.epoch,
            row.train_acc,
            row.val_acc
        )?;
    }
    out.flush()?;
    Ok(())
}

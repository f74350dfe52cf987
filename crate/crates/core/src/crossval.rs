//! 2-fold cross-validation harness.
//!
//! Trains on fold 1 / tests on fold 2, then swaps. The mean image and the
//! object-level z-score statistics are recomputed per training fold, so
//! nothing leaks across the fold boundary.

use crate::dataset::{DatasetManifest, Split, NUM_CLASSES};
use crate::metrics::MetricsReport;
use crate::model::{
    train_end2end, train_stagewise, ExperimentConfig, OlStats, SplitPlan, TrainMode,
};
use crate::{Error, Result};

/// Everything recorded for one fold of the cross-validation.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    /// The headline report: the MLP head for hybrid modes, the backbone's
    /// softmax for CNN-only.
    pub report: MetricsReport,
    pub cnn_report: MetricsReport,
    pub mlp_report: Option<MetricsReport>,
    pub cnn: crate::model::Cnn3lModel,
    pub mlp: Option<crate::model::MlpModel>,
    /// Normalization statistics actually used, for leakage auditing.
    pub mean_image: Vec<f32>,
    pub ol_stats: OlStats,
    pub n_train: usize,
    pub n_test: usize,
}

/// Per-fold outcomes plus the arithmetic-mean report.
#[derive(Debug, Clone)]
pub struct CrossvalOutcome {
    pub folds: [FoldOutcome; 2],
    pub averaged: MetricsReport,
}

fn run_fold(
    manifest: &DatasetManifest,
    plan: SplitPlan,
    cfg: &ExperimentConfig,
) -> Result<FoldOutcome> {
    let n_train = manifest.samples_in(plan.train).count();
    let n_test = manifest.samples_in(plan.test).count();
    match cfg.mode {
        TrainMode::EndToEnd => {
            let out = train_end2end(manifest, plan, cfg)?;
            let report = out.mlp_report.clone().unwrap_or_else(|| out.cnn_report.clone());
            Ok(FoldOutcome {
                report,
                cnn_report: out.cnn_report,
                mlp_report: out.mlp_report,
                cnn: out.cnn,
                mlp: out.mlp,
                mean_image: out.mean_image,
                ol_stats: out.ol_stats,
                n_train,
                n_test,
            })
        }
        TrainMode::Stagewise | TrainMode::CnnOnly => {
            let mut fold_cfg = cfg.clone();
            if cfg.mode == TrainMode::CnnOnly {
                fold_cfg.branch_switch = false;
            }
            let out = train_stagewise(manifest, plan, &fold_cfg)?;
            let report = out.mlp_report.clone().unwrap_or_else(|| out.cnn_report.clone());
            Ok(FoldOutcome {
                report,
                cnn_report: out.cnn_report,
                mlp_report: out.mlp_report,
                cnn: out.cnn,
                mlp: out.mlp,
                mean_image: out.mean_image,
                ol_stats: out.ol_stats,
                n_train,
                n_test,
            })
        }
    }
}

/// Arithmetic mean of two reports. Confusion matrices are summed (the two
/// test folds partition the dataset); every rate and AUC is the
/// unweighted mean of the per-fold values.
pub fn average_reports(a: &MetricsReport, b: &MetricsReport) -> MetricsReport {
    let mut confusion = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for r in 0..NUM_CLASSES {
        for c in 0..NUM_CLASSES {
            confusion[r][c] = a.confusion[r][c] + b.confusion[r][c];
        }
    }
    let mean = |x: f64, y: f64| (x + y) / 2.0;
    let mut per_class = a.per_class;
    for (m, (x, y)) in per_class.iter_mut().zip(a.per_class.iter().zip(&b.per_class)) {
        m.precision = mean(x.precision, y.precision);
        m.recall = mean(x.recall, y.recall);
        m.f1 = mean(x.f1, y.f1);
    }
    let mut auc_per_class = [None; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        auc_per_class[c] = match (a.auc_per_class[c], b.auc_per_class[c]) {
            (Some(x), Some(y)) => Some(mean(x, y)),
            _ => None,
        };
    }
    MetricsReport {
        n_samples: a.n_samples + b.n_samples,
        confusion,
        per_class,
        macro_precision: mean(a.macro_precision, b.macro_precision),
        macro_recall: mean(a.macro_recall, b.macro_recall),
        macro_f1: mean(a.macro_f1, b.macro_f1),
        micro_precision: mean(a.micro_precision, b.micro_precision),
        micro_recall: mean(a.micro_recall, b.micro_recall),
        micro_f1: mean(a.micro_f1, b.micro_f1),
        auc_per_class,
        auc_micro: mean(a.auc_micro, b.auc_micro),
        auc_macro: mean(a.auc_macro, b.auc_macro),
        mean_loss: mean(a.mean_loss, b.mean_loss),
    }
}

/// Run the experiment on both fold assignments and average the reports.
/// Requires fold tags on the manifest (see
/// [`crate::dataset::split_2fold`]).
pub fn crossval_2fold(
    manifest: &DatasetManifest,
    cfg: &ExperimentConfig,
) -> Result<CrossvalOutcome> {
    let n_fold1 = manifest.samples_in(Split::Fold1).count();
    let n_fold2 = manifest.samples_in(Split::Fold2).count();
    if n_fold1 == 0 || n_fold2 == 0 {
        return Err(Error::State(
            "crossval_2fold requires fold tags on the manifest".into(),
        ));
    }
    let fold_a = run_fold(manifest, SplitPlan::folds(Split::Fold1, Split::Fold2), cfg)?;
    let fold_b = run_fold(manifest, SplitPlan::folds(Split::Fold2, Split::Fold1), cfg)?;
    let averaged = average_reports(&fold_a.report, &fold_b.report);
    Ok(CrossvalOutcome {
        folds: [fold_a, fold_b],
        averaged,
    })
}

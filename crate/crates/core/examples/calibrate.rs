//! Scratch calibration runs (not part of the test suite).

use olconv_core::dataset::{self, Split};
use olconv_core::model::{self, SplitPlan, TrainConfig};
use olconv_core::segment;
use std::time::Instant;

fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("seg");

    if mode == "seg" {
        let samples = dataset::generate_dataset(67, 20260810);
        let mut ious = Vec::new();
        let mut per_class: [Vec<f64>; 4] = Default::default();
        for (_, s) in &samples {
            if s.is_empty() {
                continue;
            }
            match segment::segment(&s.patch) {
                Ok(seg) => {
                    let v = iou(&seg.mask.bitmap, &s.truth_mask);
                    ious.push(v);
                    per_class[(s.label - 1) as usize].push(v);
                }
                Err(e) => {
                    ious.push(0.0);
                    per_class[(s.label - 1) as usize].push(0.0);
                    eprintln!("segment failed for class {}: {e}", s.label);
                }
            }
        }
        let mean: f64 = ious.iter().sum::<f64>() / ious.len() as f64;
        println!("fixtures with masks: {}", ious.len());
        println!("mean IoU: {mean:.4}");
        for (c, v) in per_class.iter().enumerate() {
            if !v.is_empty() {
                let m: f64 = v.iter().sum::<f64>() / v.len() as f64;
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                println!("  class {}: n={} mean={m:.4} min={lo:.4}", c + 1, v.len());
            }
        }
        return;
    }

    // Training calibration: small dataset, few epochs.
    let n_per_class: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(50);
    let epochs: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(3);
    let lr: f32 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1e-4);
    let samples = dataset::generate_dataset(n_per_class, 42);
    let mut manifest = dataset::DatasetManifest::new(
        samples
            .into_iter()
            .map(|(id, s)| dataset::LabeledSample {
                sample_id: id,
                patch: s.patch,
                label: s.label,
                synthetic: false,
                split: Split::Unassigned,
                ol_degenerate: None,
            })
            .collect(),
        "calibrate",
    );
    dataset::split(&mut manifest, (0.7, 0.15, 0.15), 7).unwrap();

    let t0 = Instant::now();
    let data = model::prepare(&manifest, SplitPlan::standard()).unwrap();
    println!("prepare: {:?}", t0.elapsed());

    let cfg = TrainConfig {
        learning_rate: lr,
        epochs,
        batch_size: 64,
        seed: 42,
    };
    let t0 = Instant::now();
    let trained = model::train_cnn(&data, &cfg, 3).unwrap();
    let train_time = t0.elapsed();
    for log in &trained.log {
        println!(
            "epoch {:>3} loss {:.4} acc {:.4}",
            log.epoch, log.loss, log.accuracy
        );
    }
    println!("train_cnn: {train_time:?}");

    let test_labels: Vec<u8> = data.test.iter().map(|s| s.label).collect();
    let scores = model::cnn_scores(&trained.model, &data.test).unwrap();
    let report = olconv_core::metrics::evaluate(&scores, &test_labels).unwrap();
    println!("test macro-F1: {:.4} auc_macro {:.4}", report.macro_f1, report.auc_macro);
}

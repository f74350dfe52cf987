//! Dataset handling: labeled 27×27 patches, stratified splitting,
//! mean-image normalization, ADASYN balancing over flattened patches, a
//! synthetic patch generator, and the on-disk formats.

mod ingest;
mod io;
mod synth;

pub use ingest::{ingest, reflect_index};
pub use io::{
    load_dataset, read_cnn_features, read_feature_csv, save_dataset, write_cnn_features,
    write_feature_csv,
};
pub use synth::{generate_dataset, generate_manifest, generate_sample, synth_generate, SynthSample};

use crate::adasyn::{self, BalanceConfig};
use crate::nn::TensorBuffer;
use crate::rng::{self};
use crate::segment::{RgbPatch, PATCH_LEN, PATCH_SIZE};
use crate::{Error, Result};

/// Number of nucleus classes.
pub const NUM_CLASSES: usize = 4;

/// Class names in label order (labels are 1-based).
pub const CLASS_NAMES: [&str; NUM_CLASSES] =
    ["Epithelial", "Fibroblast", "Inflammatory", "Miscellaneous"];

/// Which partition a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
    Fold1,
    Fold2,
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Fold1 => "fold1",
            Split::Fold2 => "fold2",
            Split::Unassigned => "unassigned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            "fold1" => Split::Fold1,
            "fold2" => Split::Fold2,
            "unassigned" => Split::Unassigned,
            _ => return None,
        })
    }
}

/// A labeled patch and its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub sample_id: String,
    pub patch: RgbPatch,
    /// 1-based class label in 1..=4.
    pub label: u8,
    pub synthetic: bool,
    pub split: Split,
    /// Set once object-level features have been extracted: true when the
    /// extraction degenerated to the zero vector.
    pub ol_degenerate: Option<bool>,
}

/// An in-memory dataset: samples, the training-split mean image (once
/// computed), and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub samples: Vec<LabeledSample>,
    /// Per-pixel-per-channel mean over the training split, `[27, 27, 3]`
    /// row-major. Present iff a training split exists and the mean has
    /// been computed.
    pub mean_image: Option<Vec<f32>>,
    /// Free-form source description.
    pub provenance: String,
    /// Seed of the last randomized operation applied, when any.
    pub seed: Option<u64>,
}

impl DatasetManifest {
    pub fn new(samples: Vec<LabeledSample>, provenance: impl Into<String>) -> Self {
        DatasetManifest {
            samples,
            mean_image: None,
            provenance: provenance.into(),
            seed: None,
        }
    }

    /// Per-class sample counts, indexed by `label - 1`.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for s in &self.samples {
            counts[(s.label - 1) as usize] += 1;
        }
        counts
    }

    pub fn samples_in(&self, split: Split) -> impl Iterator<Item = &LabeledSample> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

fn validate_label(label: u8) -> Result<()> {
    if (1..=NUM_CLASSES as u8).contains(&label) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "class label must be in 1..={NUM_CLASSES}, got {label}"
        )))
    }
}

/// Per-class index lists (ascending label order), erroring when a present
/// class has fewer than `min_per_class` samples.
fn stratified_indices(
    manifest: &DatasetManifest,
    min_per_class: usize,
) -> Result<Vec<(u8, Vec<usize>)>> {
    let mut by_class: Vec<(u8, Vec<usize>)> = Vec::new();
    for label in 1..=NUM_CLASSES as u8 {
        let idx: Vec<usize> = manifest
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == label)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < min_per_class {
            return Err(Error::Split(format!(
                "class {label} has only {} samples (need at least {min_per_class})",
                idx.len()
            )));
        }
        by_class.push((label, idx));
    }
    if by_class.is_empty() {
        return Err(Error::Split("dataset has no samples".into()));
    }
    Ok(by_class)
}

/// Stratified train/val/test split. Per-class counts are floor
/// allocations of the ratios with the remainder assigned to train; the
/// shuffle is deterministic in the seed.
pub fn split(manifest: &mut DatasetManifest, ratios: (f64, f64, f64), seed: u64) -> Result<()> {
    let sum = ratios.0 + ratios.1 + ratios.2;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Argument(format!(
            "split ratios must sum to 1, got {sum}"
        )));
    }
    if ratios.0 < 0.0 || ratios.1 < 0.0 || ratios.2 < 0.0 {
        return Err(Error::Argument("split ratios must be non-negative".into()));
    }
    let by_class = stratified_indices(manifest, 3)?;
    let mut rng = rng::stream(seed, rng::tags::SPLIT);
    for (_, mut idx) in by_class {
        rng.shuffle(&mut idx);
        let n = idx.len();
        let n_train = (ratios.0 * n as f64).floor() as usize;
        let n_val = (ratios.1 * n as f64).floor() as usize;
        let n_test = (ratios.2 * n as f64).floor() as usize;
        let remainder = n - n_train - n_val - n_test;
        let train_end = n_train + remainder;
        for (pos, &i) in idx.iter().enumerate() {
            manifest.samples[i].split = if pos < train_end {
                Split::Train
            } else if pos < train_end + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    manifest.mean_image = None;
    manifest.seed = Some(seed);
    Ok(())
}

/// Stratified 2-fold assignment; odd class counts put the extra sample in
/// fold 1.
pub fn split_2fold(manifest: &mut DatasetManifest, seed: u64) -> Result<()> {
    let by_class = stratified_indices(manifest, 2)?;
    let mut rng = rng::stream(seed, rng::tags::SPLIT);
    for (_, mut idx) in by_class {
        rng.shuffle(&mut idx);
        let half = idx.len().div_ceil(2);
        for (pos, &i) in idx.iter().enumerate() {
            manifest.samples[i].split = if pos < half { Split::Fold1 } else { Split::Fold2 };
        }
    }
    manifest.mean_image = None;
    manifest.seed = Some(seed);
    Ok(())
}

/// Per-pixel-per-channel mean over the samples in `split`.
pub fn compute_mean_image_of(manifest: &DatasetManifest, split: Split) -> Result<Vec<f32>> {
    let mut sums = vec![0.0f64; PATCH_LEN];
    let mut count = 0usize;
    for s in manifest.samples_in(split) {
        for (acc, &v) in sums.iter_mut().zip(s.patch.data()) {
            *acc += v as f64;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::State(format!(
            "cannot compute mean image: no samples in split {split:?}"
        )));
    }
    Ok(sums.iter().map(|&v| (v / count as f64) as f32).collect())
}

/// Mean image of the training split, stored back on the manifest.
pub fn compute_mean_image(manifest: &mut DatasetManifest) -> Result<()> {
    let mean = compute_mean_image_of(manifest, Split::Train)?;
    manifest.mean_image = Some(mean);
    Ok(())
}

/// Subtract the training mean from a patch, yielding signed reals with no
/// clamping. The same mean is applied to every split.
pub fn apply_mean_subtract(patch: &RgbPatch, mean_image: &[f32]) -> TensorBuffer {
    assert_eq!(mean_image.len(), PATCH_LEN, "mean image length");
    let data: Vec<f32> = patch
        .data()
        .iter()
        .zip(mean_image)
        .map(|(&v, &m)| v as f32 - m)
        .collect();
    TensorBuffer::from_vec(&[PATCH_SIZE, PATCH_SIZE, 3], data).expect("patch-shaped")
}

/// ADASYN balancing over flattened raw patch vectors. Synthetic patches
/// are rounded back to 8-bit pixels and appended with fresh sample ids;
/// original samples are untouched.
pub fn balance_manifest(manifest: &DatasetManifest, cfg: &BalanceConfig) -> Result<DatasetManifest> {
    for s in &manifest.samples {
        validate_label(s.label)?;
    }
    let flattened: Vec<(Vec<f64>, u8)> = manifest
        .samples
        .iter()
        .map(|s| (s.patch.to_f64_vec(), s.label))
        .collect();
    let balanced = adasyn::balance(&flattened, cfg)?;

    let mut samples = manifest.samples.clone();
    let mut synth_counter = 0usize;
    for b in balanced.into_iter().skip(samples.len()) {
        debug_assert!(b.synthetic);
        let bytes: Vec<u8> = b
            .features
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect();
        samples.push(LabeledSample {
            sample_id: format!("adasyn_{}_{:05}", b.label, synth_counter),
            patch: RgbPatch::from_vec(bytes)?,
            label: b.label,
            synthetic: true,
            split: Split::Unassigned,
            ol_degenerate: None,
        });
        synth_counter += 1;
    }
    Ok(DatasetManifest {
        samples,
        mean_image: None,
        provenance: format!("{} + adasyn(seed={})", manifest.provenance, cfg.seed),
        seed: Some(cfg.seed),
    })
}

//! Feature fusion: z-scored object-level features appended to the CNN
//! feature block.

use super::TensorBuffer;
use crate::olfeat::{OlFeatureVector, OL_FEATURE_COUNT};

/// Per-feature mean and standard deviation of the object-level block,
/// fitted on the training split only.
#[derive(Debug, Clone, PartialEq)]
pub struct OlStats {
    pub mean: [f64; OL_FEATURE_COUNT],
    pub std: [f64; OL_FEATURE_COUNT],
}

impl OlStats {
    /// Population statistics over the given vectors.
    pub fn fit(vectors: &[[f64; OL_FEATURE_COUNT]]) -> OlStats {
        let n = vectors.len().max(1) as f64;
        let mut mean = [0.0f64; OL_FEATURE_COUNT];
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = [0.0f64; OL_FEATURE_COUNT];
        for v in vectors {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                let d = x - m;
                *s += d * d;
            }
        }
        let mut std = [0.0f64; OL_FEATURE_COUNT];
        for (s, v) in std.iter_mut().zip(&var) {
            *s = (v / n).sqrt();
        }
        OlStats { mean, std }
    }

    /// Standardize one feature vector; features with vanishing deviation
    /// map to 0.
    pub fn zscore(&self, v: &[f64; OL_FEATURE_COUNT]) -> [f64; OL_FEATURE_COUNT] {
        let mut out = [0.0f64; OL_FEATURE_COUNT];
        for i in 0..OL_FEATURE_COUNT {
            out[i] = if self.std[i] < 1e-12 {
                0.0
            } else {
                (v[i] - self.mean[i]) / self.std[i]
            };
        }
        out
    }
}

/// Concatenate one CNN feature row with the z-scored object-level block:
/// the CNN features come first, then the nine standardized values in
/// field order.
pub fn fuse(cnn_features: &[f32], ol: &OlFeatureVector, stats: &OlStats) -> TensorBuffer {
    let z = stats.zscore(&ol.to_array());
    let mut data = Vec::with_capacity(cnn_features.len() + OL_FEATURE_COUNT);
    data.extend_from_slice(cnn_features);
    data.extend(z.iter().map(|&v| v as f32));
    TensorBuffer::from_vec(&[data.len()], data).expect("non-empty")
}

//! Nucleus segmentation pipeline: contrast adjustment, color
//! normalization, blue-ratio binarization, largest-component convex hull,
//! and masked multiplication producing the segmented RGB nucleus.
//!
//! All stages are pure functions; patches may be segmented in parallel
//! with no shared state.

mod binarize;
mod contrast;
mod hull;

pub use binarize::{binarize_blue_ratio, otsu_threshold};
pub use contrast::{enhance_contrast, normalize_color};
pub use hull::largest_component_hull;

use crate::Result;

/// Side length of a nucleus patch in pixels.
pub const PATCH_SIZE: usize = 27;
/// Pixels per patch.
pub const PATCH_AREA: usize = PATCH_SIZE * PATCH_SIZE;
/// Values per patch (three channels).
pub const PATCH_LEN: usize = PATCH_AREA * 3;

/// A 27×27 RGB image patch centered on a nucleus. Values are 8-bit,
/// stored row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbPatch {
    data: Vec<u8>,
}

impl RgbPatch {
    /// All-black patch.
    pub fn black() -> Self {
        RgbPatch {
            data: vec![0; PATCH_LEN],
        }
    }

    pub fn from_vec(data: Vec<u8>) -> crate::Result<Self> {
        if data.len() != PATCH_LEN {
            return Err(crate::Error::dim("RgbPatch::from_vec", PATCH_LEN, data.len()));
        }
        Ok(RgbPatch { data })
    }

    /// Build from a per-pixel function returning `[r, g, b]`.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut data = vec![0; PATCH_LEN];
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                let px = f(r, c);
                let base = (r * PATCH_SIZE + c) * 3;
                data[base..base + 3].copy_from_slice(&px);
            }
        }
        RgbPatch { data }
    }

    /// Uniform color patch.
    pub fn solid(rgb: [u8; 3]) -> Self {
        Self::from_fn(|_, _| rgb)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.data[(row * PATCH_SIZE + col) * 3 + channel]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: u8) {
        self.data[(row * PATCH_SIZE + col) * 3 + channel] = value;
    }

    #[inline]
    pub fn rgb(&self, row: usize, col: usize) -> [u8; 3] {
        let base = (row * PATCH_SIZE + col) * 3;
        [self.data[base], self.data[base + 1], self.data[base + 2]]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Flatten to reals in pixel-major, channel-interleaved order.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }
}

/// Binary 27×27 segmentation mask plus its convex-hull polygon.
///
/// The bitmap is the rasterized filled hull of the largest connected
/// component, so every foreground pixel lies inside or on the hull.
#[derive(Debug, Clone, PartialEq)]
pub struct NucleusMask {
    /// Row-major 27×27 foreground flags.
    pub bitmap: Vec<bool>,
    /// Convex hull vertices as `(row, col)`, in a consistent winding order.
    pub hull: Vec<(i32, i32)>,
    /// Centroid `(row, col)` of the foreground pixels.
    pub centroid: (f64, f64),
}

impl NucleusMask {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bitmap[row * PATCH_SIZE + col]
    }

    pub fn area(&self) -> usize {
        self.bitmap.iter().filter(|&&b| b).count()
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bitmap
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / PATCH_SIZE, i % PATCH_SIZE))
    }
}

/// A patch with everything outside the nucleus mask zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedPatch {
    pub image: RgbPatch,
    pub mask: NucleusMask,
}

/// Per-pixel multiply of the original patch by the {0, 1} mask.
pub fn apply_mask(patch: &RgbPatch, mask: &NucleusMask) -> SegmentedPatch {
    let mut image = patch.clone();
    for r in 0..PATCH_SIZE {
        for c in 0..PATCH_SIZE {
            if !mask.get(r, c) {
                image.set(r, c, 0, 0);
                image.set(r, c, 1, 0);
                image.set(r, c, 2, 0);
            }
        }
    }
    SegmentedPatch {
        image,
        mask: mask.clone(),
    }
}

/// Intermediate results of the segmentation pipeline, exposed for
/// debugging dumps.
#[derive(Debug, Clone)]
pub struct SegmentStages {
    pub enhanced: RgbPatch,
    /// True when the blue-percentile stretch was degenerate and left the
    /// blue channel unchanged.
    pub stretch_degenerate: bool,
    pub normalized: RgbPatch,
    pub binary: Vec<bool>,
    pub segmented: SegmentedPatch,
}

/// Run the full pipeline keeping every intermediate stage.
pub fn segment_stages(patch: &RgbPatch) -> Result<SegmentStages> {
    let (enhanced, stretch_degenerate) = enhance_contrast(patch);
    let normalized = normalize_color(&enhanced);
    let binary = binarize_blue_ratio(&normalized)?;
    let mask = largest_component_hull(&binary)?;
    let segmented = apply_mask(patch, &mask);
    Ok(SegmentStages {
        enhanced,
        stretch_degenerate,
        normalized,
        binary,
        segmented,
    })
}

/// The composite segmentation pipeline:
/// enhance → normalize → binarize → hull → mask, in that order.
pub fn segment(patch: &RgbPatch) -> Result<SegmentedPatch> {
    Ok(segment_stages(patch)?.segmented)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_mask() -> NucleusMask {
        NucleusMask {
            bitmap: vec![true; PATCH_AREA],
            hull: vec![
                (0, 0),
                (PATCH_SIZE as i32 - 1, 0),
                (PATCH_SIZE as i32 - 1, PATCH_SIZE as i32 - 1),
                (0, PATCH_SIZE as i32 - 1),
            ],
            centroid: (13.0, 13.0),
        }
    }

    #[test]
    fn full_mask_is_identity() {
        let patch = RgbPatch::from_fn(|r, c| [(r * 7 % 256) as u8, (c * 5 % 256) as u8, 200]);
        let seg = apply_mask(&patch, &full_mask());
        assert_eq!(seg.image, patch);
    }

    #[test]
    fn masked_out_pixels_are_zero() {
        let patch = RgbPatch::solid([100, 150, 200]);
        let mut mask = full_mask();
        for i in 0..PATCH_AREA / 2 {
            mask.bitmap[i] = false;
        }
        let seg = apply_mask(&patch, &mask);
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                if !mask.get(r, c) {
                    assert_eq!(seg.image.rgb(r, c), [0, 0, 0]);
                } else {
                    assert_eq!(seg.image.rgb(r, c), [100, 150, 200]);
                }
            }
        }
    }

    #[test]
    fn masked_sum_equals_sum_over_mask_region() {
        let patch = RgbPatch::from_fn(|r, c| [(r * c % 251) as u8, (r + c) as u8, (r * 3) as u8]);
        let mut mask = full_mask();
        for i in 0..PATCH_AREA {
            mask.bitmap[i] = i % 3 == 0;
        }
        let seg = apply_mask(&patch, &mask);
        let total: u64 = seg.image.data().iter().map(|&v| v as u64).sum();
        let expected: u64 = mask
            .pixels()
            .map(|(r, c)| patch.rgb(r, c).iter().map(|&v| v as u64).sum::<u64>())
            .sum();
        assert_eq!(total, expected);
    }
}

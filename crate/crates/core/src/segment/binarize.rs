//! Blue-ratio transform and Otsu thresholding.

use super::{RgbPatch, PATCH_AREA, PATCH_SIZE};
use crate::{Error, Result};

/// Per-pixel blue-ratio value, emphasizing blue dominance relative to the
/// total intensity: `(100 * B / (1 + R + G)) * (256 / (1 + R + G + B))`.
#[inline]
pub fn blue_ratio(r: u8, g: u8, b: u8) -> f64 {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    (100.0 * b / (1.0 + r + g)) * (256.0 / (1.0 + r + g + b))
}

/// Otsu's threshold on a 256-bin histogram: the bin index `t` maximizing
/// the between-class variance of the split {<= t} vs {> t}. Ties resolve
/// to the smallest `t`. Returns `None` when fewer than two bins are
/// occupied (no split separates two non-empty classes).
pub fn otsu_threshold(hist: &[u32; 256]) -> Option<usize> {
    let total: u64 = hist.iter().map(|&c| c as u64).sum();
    let occupied = hist.iter().filter(|&&c| c > 0).count();
    if total == 0 || occupied < 2 {
        return None;
    }
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut best_t = None;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0u64;
    let mut sum0 = 0.0f64;
    for t in 0..255 {
        w0 += hist[t] as u64;
        sum0 += t as f64 * hist[t] as f64;
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        let mean0 = sum0 / w0 as f64;
        let mean1 = (total_sum - sum0) / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (mean0 - mean1) * (mean0 - mean1);
        if var > best_var {
            best_var = var;
            best_t = Some(t);
        }
    }
    best_t
}

/// Compute the blue-ratio image, histogram it into 256 bins over [0, 255]
/// (clamped, floor binning), and threshold with Otsu's method. Pixels with
/// a blue-ratio bin strictly above the threshold are foreground.
pub fn binarize_blue_ratio(patch: &RgbPatch) -> Result<Vec<bool>> {
    let mut bins = vec![0usize; PATCH_AREA];
    let mut hist = [0u32; 256];
    for row in 0..PATCH_SIZE {
        for col in 0..PATCH_SIZE {
            let [r, g, b] = patch.rgb(row, col);
            let br = blue_ratio(r, g, b).clamp(0.0, 255.0);
            let bin = br as usize; // floor; br is non-negative
            bins[row * PATCH_SIZE + col] = bin;
            hist[bin] += 1;
        }
    }
    let t = otsu_threshold(&hist).ok_or(Error::NoForeground)?;
    let bitmap: Vec<bool> = bins.iter().map(|&b| b > t).collect();
    if bitmap.iter().any(|&b| b) {
        Ok(bitmap)
    } else {
        Err(Error::NoForeground)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_white_patch_has_no_foreground() {
        let patch = RgbPatch::solid([255, 255, 255]);
        assert!(matches!(binarize_blue_ratio(&patch), Err(Error::NoForeground)));
    }

    #[test]
    fn otsu_separates_a_bimodal_two_value_histogram() {
        let mut hist = [0u32; 256];
        hist[40] = 300;
        hist[180] = 429;
        let t = otsu_threshold(&hist).unwrap();
        assert!((40..180).contains(&t), "t={t}");
    }

    #[test]
    fn otsu_rejects_single_valued_histograms() {
        let mut hist = [0u32; 256];
        hist[17] = 729;
        assert_eq!(otsu_threshold(&hist), None);
    }

    #[test]
    fn blue_disk_on_pink_background_is_foreground() {
        // Synthetic blob with a known mask: a centered disk of radius 6.
        let inside = |r: usize, c: usize| {
            let (dr, dc) = (r as f64 - 13.0, c as f64 - 13.0);
            dr * dr + dc * dc <= 36.0
        };
        let patch = RgbPatch::from_fn(|r, c| {
            if inside(r, c) {
                [60, 50, 150] // blue-violet nucleus
            } else {
                [230, 180, 200] // pink stroma
            }
        });
        let bitmap = binarize_blue_ratio(&patch).unwrap();
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                assert_eq!(bitmap[r * PATCH_SIZE + c], inside(r, c), "at ({r},{c})");
            }
        }
    }
}

//! Contrast adjustment and per-patch color normalization.

use super::{RgbPatch, PATCH_AREA, PATCH_SIZE};

/// Lower percentile of the blue stretch window.
const STRETCH_LO_PCT: f64 = 0.05;
/// Upper percentile of the blue stretch window.
const STRETCH_HI_PCT: f64 = 0.95;
/// Red/green values below this threshold are lifted.
const LIFT_CUTOFF: f64 = 50.0;
/// The lift maps [0, 50] onto [30, 50].
const LIFT_BASE: f64 = 30.0;

/// Nearest-rank percentile on a 256-bin histogram: the smallest value `v`
/// whose cumulative count reaches `ceil(pct * n)`.
fn histogram_percentile(hist: &[u32; 256], n: usize, pct: f64) -> u8 {
    let rank = (pct * n as f64).ceil() as u32;
    let mut cum = 0u32;
    for (v, &count) in hist.iter().enumerate() {
        cum += count;
        if cum >= rank {
            return v as u8;
        }
    }
    255
}

/// Stretch the blue channel and lift dark red/green values.
///
/// Blue values inside the [p5, p95] window of the patch's blue histogram
/// map linearly onto [0, 255], saturating outside the window. Red and
/// green values below 50 are lifted by the linear map [0, 50] → [30, 50].
///
/// Returns the adjusted patch and a flag that is true when the blue
/// histogram was degenerate (p5 == p95), in which case the blue channel is
/// left unchanged.
pub fn enhance_contrast(patch: &RgbPatch) -> (RgbPatch, bool) {
    let mut hist = [0u32; 256];
    for r in 0..PATCH_SIZE {
        for c in 0..PATCH_SIZE {
            hist[patch.get(r, c, 2) as usize] += 1;
        }
    }
    let p5 = histogram_percentile(&hist, PATCH_AREA, STRETCH_LO_PCT);
    let p95 = histogram_percentile(&hist, PATCH_AREA, STRETCH_HI_PCT);
    let degenerate = p5 == p95;

    let mut out = patch.clone();
    for r in 0..PATCH_SIZE {
        for c in 0..PATCH_SIZE {
            for ch in 0..2 {
                let v = patch.get(r, c, ch) as f64;
                if v < LIFT_CUTOFF {
                    let lifted = LIFT_BASE + v * (LIFT_CUTOFF - LIFT_BASE) / LIFT_CUTOFF;
                    out.set(r, c, ch, lifted.round().clamp(0.0, 255.0) as u8);
                }
            }
            if !degenerate {
                let v = patch.get(r, c, 2) as f64;
                let stretched = (v - p5 as f64) * 255.0 / (p95 as f64 - p5 as f64);
                out.set(r, c, 2, stretched.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    (out, degenerate)
}

/// How many standard deviations the output window spans on each side.
const NORM_SIGMA_SPAN: f64 = 2.5;

/// Standardize each channel over the patch, then map the mean to the
/// middle of the 8-bit range with ±2.5σ landing on [0, 255] (clamped).
/// A zero-variance channel maps to the constant 128.
pub fn normalize_color(patch: &RgbPatch) -> RgbPatch {
    let mut out = patch.clone();
    for ch in 0..3 {
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                let v = patch.get(r, c, ch) as f64;
                sum += v;
                sum_sq += v * v;
            }
        }
        let n = PATCH_AREA as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let std = var.sqrt();
        let scale = 255.0 / (2.0 * NORM_SIGMA_SPAN);
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                let v = if std < 1e-12 {
                    128.0
                } else {
                    let z = (patch.get(r, c, ch) as f64 - mean) / std;
                    127.5 + scale * z
                };
                out.set(r, c, ch, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

//! Object-level features of a segmented nucleus: the modal blue intensity,
//! four GLCM texture statistics, and four shape descriptors — nine values
//! in total.

use crate::segment::{self, NucleusMask, RgbPatch, SegmentedPatch, PATCH_SIZE};
use crate::{Error, Result};

/// Number of object-level features.
pub const OL_FEATURE_COUNT: usize = 9;

/// Gray levels used for GLCM quantization.
pub const GLCM_LEVELS: usize = 8;

/// Distance-1 offsets at 0°, 45°, 90°, 135° as `(d_row, d_col)`.
pub const GLCM_OFFSETS: [(i32, i32); 4] = [(0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// The nine object-level features, in their canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct OlFeatureVector {
    /// Modal blue intensity over the mask, in [0, 255].
    pub mode_blue: u8,
    pub glcm_contrast: f64,
    pub glcm_homogeneity: f64,
    pub glcm_correlation: f64,
    pub glcm_energy: f64,
    /// Foreground pixel count.
    pub area_px: u32,
    pub major_axis_px: f64,
    pub minor_axis_px: f64,
    /// In [0, 1]: 0 for a circle, approaching 1 for a line-like region.
    pub eccentricity: f64,
}

impl OlFeatureVector {
    /// Column names, matching the feature CSV layout.
    pub const FIELD_NAMES: [&'static str; OL_FEATURE_COUNT] = [
        "mode_blue",
        "glcm_contrast",
        "glcm_homogeneity",
        "glcm_correlation",
        "glcm_energy",
        "area_px",
        "major_axis_px",
        "minor_axis_px",
        "eccentricity",
    ];

    pub fn zero() -> Self {
        OlFeatureVector {
            mode_blue: 0,
            glcm_contrast: 0.0,
            glcm_homogeneity: 0.0,
            glcm_correlation: 0.0,
            glcm_energy: 0.0,
            area_px: 0,
            major_axis_px: 0.0,
            minor_axis_px: 0.0,
            eccentricity: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; OL_FEATURE_COUNT] {
        [
            self.mode_blue as f64,
            self.glcm_contrast,
            self.glcm_homogeneity,
            self.glcm_correlation,
            self.glcm_energy,
            self.area_px as f64,
            self.major_axis_px,
            self.minor_axis_px,
            self.eccentricity,
        ]
    }
}

/// Result of [`extract_ol`]: the feature vector plus a flag marking
/// patches where segmentation or texture extraction degenerated and the
/// all-zero vector was substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct OlExtraction {
    pub vector: OlFeatureVector,
    pub degenerate: bool,
}

/// Modal value of the blue channel over mask pixels; ties resolve to the
/// smallest value.
pub fn mode_intensity(seg: &SegmentedPatch) -> u8 {
    let mut hist = [0u32; 256];
    for (r, c) in seg.mask.pixels() {
        hist[seg.image.get(r, c, 2) as usize] += 1;
    }
    let mut best = 0usize;
    for v in 1..256 {
        if hist[v] > hist[best] {
            best = v;
        }
    }
    best as u8
}

/// Luma-weighted grayscale, rounded to the nearest integer.
#[inline]
fn grayscale(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

/// Quantize an 8-bit gray value to one of [`GLCM_LEVELS`] levels.
#[inline]
fn quantize(gray: u8) -> usize {
    gray as usize * GLCM_LEVELS / 256
}

/// Haralick statistics of one normalized GLCM.
fn haralick(p: &[f64]) -> (f64, f64, f64, f64) {
    let n = GLCM_LEVELS;
    let mut contrast = 0.0;
    let mut homogeneity = 0.0;
    let mut energy = 0.0;
    let mut mean_i = 0.0;
    let mut mean_j = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = p[i * n + j];
            let d = i as f64 - j as f64;
            contrast += v * d * d;
            homogeneity += v / (1.0 + d.abs());
            energy += v * v;
            mean_i += i as f64 * v;
            mean_j += j as f64 * v;
        }
    }
    let mut var_i = 0.0;
    let mut var_j = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = p[i * n + j];
            var_i += (i as f64 - mean_i) * (i as f64 - mean_i) * v;
            var_j += (j as f64 - mean_j) * (j as f64 - mean_j) * v;
        }
    }
    let sigma_prod = var_i.sqrt() * var_j.sqrt();
    let correlation = if sigma_prod < 1e-12 {
        1.0
    } else {
        let mut corr = 0.0;
        for i in 0..n {
            for j in 0..n {
                corr += (i as f64 - mean_i) * (j as f64 - mean_j) * p[i * n + j];
            }
        }
        corr / sigma_prod
    };
    (contrast, homogeneity, correlation, energy)
}

/// Gray-level co-occurrence features over the masked region.
///
/// The segmented image is converted to grayscale, quantized to 8 levels,
/// and co-occurrences are accumulated symmetrically for distance-1 offsets
/// at 0°, 45°, 90°, 135°, counting only pairs with both pixels inside the
/// mask. Each direction's matrix is normalized to sum 1; the four
/// statistics are averaged over the directions that have at least one
/// pair. Errors with [`Error::NoTexture`] when no direction has any pair.
pub fn glcm_features(seg: &SegmentedPatch) -> Result<(f64, f64, f64, f64)> {
    let mut levels = vec![0usize; PATCH_SIZE * PATCH_SIZE];
    for (r, c) in seg.mask.pixels() {
        let [pr, pg, pb] = seg.image.rgb(r, c);
        levels[r * PATCH_SIZE + c] = quantize(grayscale(pr, pg, pb));
    }

    let mut sums = (0.0, 0.0, 0.0, 0.0);
    let mut used_directions = 0usize;
    for &(dr, dc) in &GLCM_OFFSETS {
        let mut glcm = vec![0.0f64; GLCM_LEVELS * GLCM_LEVELS];
        let mut pairs = 0usize;
        for (r, c) in seg.mask.pixels() {
            let (nr, nc) = (r as i32 + dr, c as i32 + dc);
            if nr < 0 || nc < 0 || nr >= PATCH_SIZE as i32 || nc >= PATCH_SIZE as i32 {
                continue;
            }
            if !seg.mask.get(nr as usize, nc as usize) {
                continue;
            }
            let a = levels[r * PATCH_SIZE + c];
            let b = levels[nr as usize * PATCH_SIZE + nc as usize];
            glcm[a * GLCM_LEVELS + b] += 1.0;
            glcm[b * GLCM_LEVELS + a] += 1.0;
            pairs += 1;
        }
        if pairs == 0 {
            continue;
        }
        let total: f64 = glcm.iter().sum();
        for v in &mut glcm {
            *v /= total;
        }
        let (con, hom, cor, ene) = haralick(&glcm);
        sums.0 += con;
        sums.1 += hom;
        sums.2 += cor;
        sums.3 += ene;
        used_directions += 1;
    }
    if used_directions == 0 {
        return Err(Error::NoTexture);
    }
    let d = used_directions as f64;
    Ok((sums.0 / d, sums.1 / d, sums.2 / d, sums.3 / d))
}

/// Area, equivalent-ellipse axis lengths, and eccentricity from the
/// second central moments of the foreground pixel coordinates.
///
/// With covariance eigenvalues λ₁ ≥ λ₂, the axes are `4 * sqrt(λ)` and the
/// eccentricity is `sqrt(1 - λ₂ / λ₁)`. A single-pixel mask has axes 0 and
/// eccentricity 0.
pub fn shape_features(mask: &NucleusMask) -> (u32, f64, f64, f64) {
    let pixels: Vec<(usize, usize)> = mask.pixels().collect();
    let n = pixels.len();
    if n == 0 {
        return (0, 0.0, 0.0, 0.0);
    }
    let nf = n as f64;
    let mean_r = pixels.iter().map(|p| p.0 as f64).sum::<f64>() / nf;
    let mean_c = pixels.iter().map(|p| p.1 as f64).sum::<f64>() / nf;
    let (mut mrr, mut mcc, mut mrc) = (0.0f64, 0.0, 0.0);
    for &(r, c) in &pixels {
        let dr = r as f64 - mean_r;
        let dc = c as f64 - mean_c;
        mrr += dr * dr;
        mcc += dc * dc;
        mrc += dr * dc;
    }
    mrr /= nf;
    mcc /= nf;
    mrc /= nf;

    let half_trace = (mrr + mcc) / 2.0;
    let det_term = (((mrr - mcc) / 2.0).powi(2) + mrc * mrc).sqrt();
    let lambda1 = half_trace + det_term;
    let lambda2 = (half_trace - det_term).max(0.0);

    let major = 4.0 * lambda1.sqrt();
    let minor = 4.0 * lambda2.sqrt();
    let eccentricity = if lambda1 <= 0.0 {
        0.0
    } else {
        (1.0 - lambda2 / lambda1).max(0.0).sqrt()
    };
    (n as u32, major, minor, eccentricity)
}

/// Segment the patch and compute all nine features. A degenerate
/// segmentation (no foreground, or no valid co-occurrence pair) yields the
/// all-zero vector with the `degenerate` flag set — the zero vector itself
/// is the discriminating signal for non-nuclei patches.
pub fn extract_ol(patch: &RgbPatch) -> OlExtraction {
    let seg = match segment::segment(patch) {
        Ok(seg) => seg,
        Err(Error::NoForeground) => {
            return OlExtraction {
                vector: OlFeatureVector::zero(),
                degenerate: true,
            }
        }
        Err(e) => unreachable!("segment cannot fail with {e:?}"),
    };
    let (contrast, homogeneity, correlation, energy) = match glcm_features(&seg) {
        Ok(t) => t,
        Err(Error::NoTexture) => {
            return OlExtraction {
                vector: OlFeatureVector::zero(),
                degenerate: true,
            }
        }
        Err(e) => unreachable!("glcm_features cannot fail with {e:?}"),
    };
    let mode_blue = mode_intensity(&seg);
    let (area_px, major_axis_px, minor_axis_px, eccentricity) = shape_features(&seg.mask);
    OlExtraction {
        vector: OlFeatureVector {
            mode_blue,
            glcm_contrast: contrast,
            glcm_homogeneity: homogeneity,
            glcm_correlation: correlation,
            glcm_energy: energy,
            area_px,
            major_axis_px,
            minor_axis_px,
            eccentricity,
        },
        degenerate: false,
    }
}

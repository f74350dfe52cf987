//! Synthetic H&E-like patch generator.
//!
//! Produces 27×27 patches over a pink-noise background with class-specific
//! nucleus geometry, together with the ground-truth masks that make
//! segmentation quality measurable without any external dataset:
//!
//! * class 1 — large round blue ellipse (semi-axes 8–11 px),
//! * class 2 — elongated spindle (major 10–13, minor 2–4, random angle),
//! * class 3 — small dark-blue disk (radii 3–5),
//! * class 4 — faint irregular low-blue blob, or an empty patch.

use super::NUM_CLASSES;
use crate::rng::{self, SplitMix64};
use crate::segment::{RgbPatch, PATCH_AREA, PATCH_SIZE};
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

/// One generated patch with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthSample {
    pub patch: RgbPatch,
    /// Rasterized true nucleus mask; all-false for empty patches.
    pub truth_mask: Vec<bool>,
    pub label: u8,
}

impl SynthSample {
    pub fn is_empty(&self) -> bool {
        !self.truth_mask.iter().any(|&b| b)
    }
}

const BG: [f64; 3] = [225.0, 170.0, 190.0];

struct Ellipse {
    center: (f64, f64),
    semi_major: f64,
    semi_minor: f64,
    angle: f64,
    /// Amplitude of the 3-lobed radial wobble (0 for true ellipses).
    wobble: f64,
    wobble_phase: f64,
}

impl Ellipse {
    fn contains(&self, row: f64, col: f64) -> bool {
        let dr = row - self.center.0;
        let dc = col - self.center.1;
        let (sin, cos) = self.angle.sin_cos();
        let u = dc * cos + dr * sin;
        let v = -dc * sin + dr * cos;
        let radius = if self.wobble == 0.0 {
            1.0
        } else {
            let phi = v.atan2(u);
            1.0 + self.wobble * (3.0 * phi + self.wobble_phase).sin()
        };
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2) <= radius * radius
    }
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Generate one patch for `label`, advancing `rng` a deterministic number
/// of times per geometry parameter and once per pixel channel.
pub fn generate_sample(label: u8, rng: &mut SplitMix64) -> SynthSample {
    assert!((1..=NUM_CLASSES as u8).contains(&label), "label {label}");

    let jitter = |rng: &mut SplitMix64| 13.0 + rng.uniform(-1.0, 1.0);
    let (ellipse, color, texture_amp): (Option<Ellipse>, [f64; 3], f64) = match label {
        1 => {
            let a = rng.uniform(8.0, 11.0);
            let b = a * rng.uniform(0.85, 1.0);
            let angle = rng.uniform(0.0, std::f64::consts::PI);
            let center = (jitter(rng), jitter(rng));
            (
                Some(Ellipse {
                    center,
                    semi_major: a,
                    semi_minor: b,
                    angle,
                    wobble: 0.0,
                    wobble_phase: 0.0,
                }),
                [70.0, 60.0, 210.0],
                18.0,
            )
        }
        2 => {
            let a = rng.uniform(10.0, 13.0);
            let b = rng.uniform(2.0, 4.0);
            let angle = rng.uniform(0.0, std::f64::consts::PI);
            (
                Some(Ellipse {
                    center: (13.0, 13.0),
                    semi_major: a,
                    semi_minor: b,
                    angle,
                    wobble: 0.0,
                    wobble_phase: 0.0,
                }),
                [95.0, 80.0, 200.0],
                15.0,
            )
        }
        3 => {
            let r = rng.uniform(3.0, 5.0);
            let center = (jitter(rng), jitter(rng));
            (
                Some(Ellipse {
                    center,
                    semi_major: r,
                    semi_minor: r,
                    angle: 0.0,
                    wobble: 0.0,
                    wobble_phase: 0.0,
                }),
                [45.0, 40.0, 220.0],
                12.0,
            )
        }
        _ => {
            if rng.next_f64() < 0.5 {
                // Empty patch: one uniform background shade. Kept
                // noise-free so the blue-ratio image is constant and the
                // segmentation degenerates to NoForeground — the signal
                // the zero object-level vector encodes.
                let px = [
                    clamp_u8(BG[0] + rng.uniform(-8.0, 8.0)),
                    clamp_u8(BG[1] + rng.uniform(-8.0, 8.0)),
                    clamp_u8(BG[2] + rng.uniform(-8.0, 8.0)),
                ];
                return SynthSample {
                    patch: RgbPatch::from_fn(|_, _| px),
                    truth_mask: vec![false; PATCH_AREA],
                    label,
                };
            } else {
                let a = rng.uniform(5.0, 8.0);
                let b = rng.uniform(3.0, 6.0).min(a);
                let angle = rng.uniform(0.0, std::f64::consts::PI);
                let center = (jitter(rng), jitter(rng));
                let phase = rng.uniform(0.0, std::f64::consts::TAU);
                (
                    Some(Ellipse {
                        center,
                        semi_major: a,
                        semi_minor: b,
                        angle,
                        wobble: 0.2,
                        wobble_phase: phase,
                    }),
                    [170.0, 150.0, 200.0],
                    12.0,
                )
            }
        }
    };

    // Smooth background gradient, one direction per patch.
    let grad_r = rng.uniform(-6.0, 6.0);
    let grad_c = rng.uniform(-6.0, 6.0);

    let mut truth_mask = vec![false; PATCH_AREA];
    let patch = RgbPatch::from_fn(|r, c| {
        let inside = ellipse
            .as_ref()
            .map(|e| e.contains(r as f64, c as f64))
            .unwrap_or(false);
        if inside {
            truth_mask[r * PATCH_SIZE + c] = true;
        }
        let mut px = [0u8; 3];
        for ch in 0..3 {
            let base = if inside { color[ch] } else { BG[ch] };
            let noise_amp = if inside { texture_amp } else { 10.0 };
            let gradient = if inside {
                0.0
            } else {
                grad_r * (r as f64 / PATCH_SIZE as f64 - 0.5)
                    + grad_c * (c as f64 / PATCH_SIZE as f64 - 0.5)
            };
            px[ch] = clamp_u8(base + gradient + rng.uniform(-noise_amp, noise_amp));
        }
        px
    });

    SynthSample {
        patch,
        truth_mask,
        label,
    }
}

/// Generate `n_per_class` patches per class (in label order) from the
/// given seed.
pub fn generate_dataset(n_per_class: usize, seed: u64) -> Vec<(String, SynthSample)> {
    let mut rng = rng::stream(seed, rng::tags::SYNTH_GEN);
    let mut out = Vec::with_capacity(n_per_class * NUM_CLASSES);
    for label in 1..=NUM_CLASSES as u8 {
        for i in 0..n_per_class {
            let id = format!("synth_c{label}_{i:05}");
            out.push((id, generate_sample(label, &mut rng)));
        }
    }
    out
}

/// Generate a synthetic dataset directly as an in-memory manifest
/// (ground-truth masks are dropped; use [`generate_dataset`] when they
/// are needed).
pub fn generate_manifest(n_per_class: usize, seed: u64) -> super::DatasetManifest {
    let samples = generate_dataset(n_per_class, seed)
        .into_iter()
        .map(|(id, s)| super::LabeledSample {
            sample_id: id,
            patch: s.patch,
            label: s.label,
            synthetic: false,
            split: super::Split::Unassigned,
            ol_degenerate: None,
        })
        .collect();
    let mut manifest = super::DatasetManifest::new(samples, format!("synthetic(seed={seed})"));
    manifest.seed = Some(seed);
    manifest
}

fn mask_to_png(mask: &[bool]) -> image::GrayImage {
    image::GrayImage::from_fn(PATCH_SIZE as u32, PATCH_SIZE as u32, |x, y| {
        let on = mask[y as usize * PATCH_SIZE + x as usize];
        image::Luma([if on { 255u8 } else { 0 }])
    })
}

fn patch_to_png(patch: &RgbPatch) -> image::RgbImage {
    image::RgbImage::from_fn(PATCH_SIZE as u32, PATCH_SIZE as u32, |x, y| {
        image::Rgb(patch.rgb(y as usize, x as usize))
    })
}

/// Write a synthetic dataset to disk: patch PNGs under `images/`, truth
/// masks under `masks/`, a ground-truth CSV (`gt.csv`) ready for
/// [`super::ingest`], and a `truth.csv` mapping samples to their masks.
/// Returns the generated samples.
pub fn synth_generate(
    n_per_class: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<(String, SynthSample)>> {
    if n_per_class < 1 {
        return Err(Error::Argument("n_per_class must be >= 1".into()));
    }
    let images_dir = out_dir.join("images");
    let masks_dir = out_dir.join("masks");
    std::fs::create_dir_all(&images_dir)?;
    std::fs::create_dir_all(&masks_dir)?;

    let samples = generate_dataset(n_per_class, seed);

    let mut gt = std::io::BufWriter::new(std::fs::File::create(out_dir.join("gt.csv"))?);
    writeln!(gt, "image_id,x,y,class_id")?;
    let mut truth = std::io::BufWriter::new(std::fs::File::create(out_dir.join("truth.csv"))?);
    writeln!(truth, "sample_id,label,mask_file,empty")?;

    let center = (PATCH_SIZE - 1) / 2;
    for (id, sample) in &samples {
        patch_to_png(&sample.patch)
            .save(images_dir.join(format!("{id}.png")))
            .map_err(Error::Image)?;
        writeln!(gt, "{id},{center},{center},{}", sample.label)?;
        if sample.is_empty() {
            writeln!(truth, "{id},{},-,1", sample.label)?;
        } else {
            let mask_file = format!("masks/{id}.png");
            mask_to_png(&sample.truth_mask)
                .save(out_dir.join(&mask_file))
                .map_err(Error::Image)?;
            writeln!(truth, "{id},{},{mask_file},0", sample.label)?;
        }
    }
    gt.flush()?;
    truth.flush()?;
    Ok(samples)
}

//! Ingestion of PNG images plus a centroid ground-truth CSV into labeled
//! patches.

use super::{DatasetManifest, LabeledSample, Split, NUM_CLASSES};
use crate::segment::{RgbPatch, PATCH_SIZE};
use crate::{Error, Result};
use std::collections::HashMap;
use std::path::Path;

/// Patch half-width: patches span `[center - 13, center + 13]`.
const HALF: i64 = (PATCH_SIZE as i64 - 1) / 2;

/// Mirror an out-of-range coordinate back into `[0, n)` without repeating
/// the edge sample (`-1 -> 1`, `n -> n - 2`).
pub fn reflect_index(i: i64, n: usize) -> usize {
    let n = n as i64;
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - m;
    }
    m as usize
}

struct LoadedImage {
    width: usize,
    height: usize,
    /// Row-major RGB bytes.
    pixels: Vec<u8>,
}

fn load_image(image_dir: &Path, image_id: &str) -> Result<LoadedImage> {
    let path = image_dir.join(format!("{image_id}.png"));
    if !path.is_file() {
        return Err(Error::Ingest(format!(
            "missing image file for image_id '{image_id}' (expected {})",
            path.display()
        )));
    }
    let img = image::open(&path)?.into_rgb8();
    Ok(LoadedImage {
        width: img.width() as usize,
        height: img.height() as usize,
        pixels: img.into_raw(),
    })
}

/// Cut the 27×27 patch centered at `(x, y)` (x = column, y = row, both
/// 0-based), reflecting at the borders.
fn extract_patch(img: &LoadedImage, x: i64, y: i64) -> RgbPatch {
    RgbPatch::from_fn(|pr, pc| {
        let iy = reflect_index(y - HALF + pr as i64, img.height);
        let ix = reflect_index(x - HALF + pc as i64, img.width);
        let base = (iy * img.width + ix) * 3;
        [img.pixels[base], img.pixels[base + 1], img.pixels[base + 2]]
    })
}

/// Read `groundtruth_csv` (header `image_id,x,y,class_id`, 0-based pixel
/// coordinates) and cut one patch per row from the PNGs in `image_dir`.
/// Rows whose center lies outside their image are rejected with a logged
/// warning; malformed rows and missing images are errors.
pub fn ingest(image_dir: &Path, groundtruth_csv: &Path) -> Result<DatasetManifest> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(groundtruth_csv)
        .map_err(|e| Error::Ingest(format!("cannot open {}: {e}", groundtruth_csv.display())))?;

    {
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
        let expected = ["image_id", "x", "y", "class_id"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header image_id,x,y,class_id, got '{}'", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
    }

    let mut images: HashMap<String, LoadedImage> = HashMap::new();
    let mut samples = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let image_id = record[0].to_string();
        let x: i64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad x coordinate '{}'", &record[1]),
        })?;
        let y: i64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad y coordinate '{}'", &record[2]),
        })?;
        let class_id: u8 = record[3].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad class_id '{}'", &record[3]),
        })?;
        if !(1..=NUM_CLASSES as u8).contains(&class_id) {
            return Err(Error::Parse {
                line,
                message: format!("class_id must be in 1..={NUM_CLASSES}, got {class_id}"),
            });
        }

        if !images.contains_key(&image_id) {
            let img = load_image(image_dir, &image_id)?;
            images.insert(image_id.clone(), img);
        }
        let img = &images[&image_id];
        if x < 0 || y < 0 || x >= img.width as i64 || y >= img.height as i64 {
            log::warn!(
                "line {line}: center ({x}, {y}) outside image '{image_id}' ({}x{}); row rejected",
                img.width,
                img.height
            );
            continue;
        }

        samples.push(LabeledSample {
            sample_id: format!("{image_id}_r{row_idx:06}"),
            patch: extract_patch(img, x, y),
            label: class_id,
            synthetic: false,
            split: Split::Unassigned,
            ol_degenerate: None,
        });
    }

    Ok(DatasetManifest::new(
        samples,
        format!("ingest({}, {})", image_dir.display(), groundtruth_csv.display()),
    ))
}

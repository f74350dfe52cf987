//! On-disk formats: the dataset manifest, the feature CSV, and the
//! CNN-feature binary.
//!
//! # Manifest grammar
//!
//! Line-oriented `key=value` header followed by a sample table:
//!
//! ```text
//! olconv_manifest_version=1
//! provenance=<free text, single line>
//! seed=<u64 or "-">
//! n_samples=<count>
//! class_counts=<c1>,<c2>,<c3>,<c4>
//! mean_image=<2187 space-separated f32 values>     (optional)
//! samples:
//! <sample_id>\t<label>\t<synthetic 0|1>\t<split>\t<patch_file>\t<ol_degenerate 0|1|->
//! ```
//!
//! Patch files are PNGs relative to the manifest's directory. Floats use
//! Rust's shortest round-trip formatting, so a save/load cycle is exact.
//!
//! # CNN-feature binary
//!
//! Magic bytes `OLCV`, then little-endian `u32` version (= 1), `u32`
//! n_samples, `u32` dim, then `n_samples * dim` little-endian `f32`
//! values, row-major.

use super::{DatasetManifest, LabeledSample, Split, NUM_CLASSES};
use crate::nn::TensorBuffer;
use crate::olfeat::OlFeatureVector;
use crate::segment::{RgbPatch, PATCH_LEN, PATCH_SIZE};
use crate::{Error, Result};
use std::io::{BufRead, Read, Write};
use std::path::Path;

const MANIFEST_VERSION: u32 = 1;
const CNN_FEATURE_MAGIC: &[u8; 4] = b"OLCV";
const CNN_FEATURE_VERSION: u32 = 1;

fn patch_to_png(patch: &RgbPatch) -> image::RgbImage {
    image::RgbImage::from_fn(PATCH_SIZE as u32, PATCH_SIZE as u32, |x, y| {
        image::Rgb(patch.rgb(y as usize, x as usize))
    })
}

fn png_to_patch(path: &Path) -> Result<RgbPatch> {
    let img = image::open(path)?.into_rgb8();
    if img.width() as usize != PATCH_SIZE || img.height() as usize != PATCH_SIZE {
        return Err(Error::Ingest(format!(
            "patch {} is {}x{}, expected {PATCH_SIZE}x{PATCH_SIZE}",
            path.display(),
            img.width(),
            img.height()
        )));
    }
    RgbPatch::from_vec(img.into_raw())
}

/// Write `manifest.txt` plus per-sample patch PNGs under `dir/patches/`.
pub fn save_dataset(manifest: &DatasetManifest, dir: &Path) -> Result<()> {
    let patches_dir = dir.join("patches");
    std::fs::create_dir_all(&patches_dir)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join("manifest.txt"))?);
    writeln!(out, "olconv_manifest_version={MANIFEST_VERSION}")?;
    writeln!(out, "provenance={}", manifest.provenance.replace('\n', " "))?;
    match manifest.seed {
        Some(seed) => writeln!(out, "seed={seed}")?,
        None => writeln!(out, "seed=-")?,
    }
    writeln!(out, "n_samples={}", manifest.samples.len())?;
    let counts = manifest.class_counts();
    writeln!(
        out,
        "class_counts={}",
        counts.map(|c| c.to_string()).join(",")
    )?;
    if let Some(mean) = &manifest.mean_image {
        let joined: Vec<String> = mean.iter().map(|v| v.to_string()).collect();
        writeln!(out, "mean_image={}", joined.join(" "))?;
    }
    writeln!(out, "samples:")?;
    for s in &manifest.samples {
        let rel = format!("patches/{}.png", s.sample_id);
        patch_to_png(&s.patch)
            .save(dir.join(&rel))
            .map_err(Error::Image)?;
        let degenerate = match s.ol_degenerate {
            None => "-",
            Some(true) => "1",
            Some(false) => "0",
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.sample_id,
            s.label,
            if s.synthetic { 1 } else { 0 },
            s.split.as_str(),
            rel,
            degenerate
        )?;
    }
    out.flush()?;
    Ok(())
}

fn parse_kv(line: &str, lineno: usize) -> Result<(&str, &str)> {
    line.split_once('=').ok_or(Error::Parse {
        line: lineno,
        message: format!("expected key=value, got '{line}'"),
    })
}

/// Load a dataset saved by [`save_dataset`].
pub fn load_dataset(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join("manifest.txt");
    let file = std::fs::File::open(&path)
        .map_err(|e| Error::Ingest(format!("cannot open {}: {e}", path.display())))?;
    let reader = std::io::BufReader::new(file);

    let mut provenance = String::new();
    let mut seed = None;
    let n_samples: Option<usize> = None;
    let mut mean_image = None;
    let mut samples = Vec::new();
    let mut in_table = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if !in_table {
            if line == "samples:" {
                in_table = true;
                continue;
            }
            let (key, value) = parse_kv(&line, lineno)?;
            match key {
                "olconv_manifest_version" => {
                    let v: u32 = value.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad version '{value}'"),
                    })?;
                    if v != MANIFEST_VERSION {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("unsupported manifest version {v}"),
                        });
                    }
                }
                "provenance" => provenance = value.to_string(),
                "seed" => {
                    seed = if value == "-" {
                        None
                    } else {
                        Some(value.parse().map_err(|_| Error::Parse {
                            line: lineno,
                            message: format!("bad seed '{value}'"),
                        })?)
                    }
                }
                "n_samples" | "class_counts" => {} // informational; recomputed
                "mean_image" => {
                    let values: std::result::Result<Vec<f32>, _> =
                        value.split(' ').map(|v| v.parse::<f32>()).collect();
                    let values = values.map_err(|_| Error::Parse {
                        line: lineno,
                        message: "bad mean_image values".into(),
                    })?;
                    if values.len() != PATCH_LEN {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!(
                                "mean_image has {} values, expected {PATCH_LEN}",
                                values.len()
                            ),
                        });
                    }
                    mean_image = Some(values);
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unknown manifest key '{other}'"),
                    })
                }
            }
        } else {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 6 tab-separated fields, got {}", fields.len()),
                });
            }
            let label: u8 = fields[1].parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad label '{}'", fields[1]),
            })?;
            if !(1..=NUM_CLASSES as u8).contains(&label) {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("label out of range: {label}"),
                });
            }
            let synthetic = match fields[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("bad synthetic flag '{other}'"),
                    })
                }
            };
            let split = Split::parse(fields[3]).ok_or(Error::Parse {
                line: lineno,
                message: format!("bad split '{}'", fields[3]),
            })?;
            let ol_degenerate = match fields[5] {
                "-" => None,
                "0" => Some(false),
                "1" => Some(true),
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("bad ol_degenerate flag '{other}'"),
                    })
                }
            };
            samples.push(LabeledSample {
                sample_id: fields[0].to_string(),
                patch: png_to_patch(&dir.join(fields[4]))?,
                label,
                synthetic,
                split,
                ol_degenerate,
            });
        }
    }

    if let Some(n) = n_samples {
        let _: usize = n;
    }
    Ok(DatasetManifest {
        samples,
        mean_image,
        provenance,
        seed,
    })
}

/// Feature CSV header, fixed by the interface contract.
pub const FEATURE_CSV_HEADER: &str = "sample_id,label,mode_blue,glcm_contrast,glcm_homogeneity,glcm_correlation,glcm_energy,area_px,major_axis_px,minor_axis_px,eccentricity";

/// Write object-level features as CSV.
pub fn write_feature_csv(
    path: &Path,
    rows: &[(String, u8, OlFeatureVector)],
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{FEATURE_CSV_HEADER}")?;
    for (id, label, fv) in rows {
        writeln!(
            out,
            "{id},{label},{},{},{},{},{},{},{},{},{}",
            fv.mode_blue,
            fv.glcm_contrast,
            fv.glcm_homogeneity,
            fv.glcm_correlation,
            fv.glcm_energy,
            fv.area_px,
            fv.major_axis_px,
            fv.minor_axis_px,
            fv.eccentricity
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Read a feature CSV written by [`write_feature_csv`].
pub fn read_feature_csv(path: &Path) -> Result<Vec<(String, u8, OlFeatureVector)>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if lineno == 1 {
            if line != FEATURE_CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: "bad feature CSV header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 11 fields, got {}", fields.len()),
            });
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad real '{s}'"),
            })
        };
        rows.push((
            fields[0].to_string(),
            fields[1].parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad label '{}'", fields[1]),
            })?,
            OlFeatureVector {
                mode_blue: fields[2].parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad mode_blue '{}'", fields[2]),
                })?,
                glcm_contrast: parse_f64(fields[3])?,
                glcm_homogeneity: parse_f64(fields[4])?,
                glcm_correlation: parse_f64(fields[5])?,
                glcm_energy: parse_f64(fields[6])?,
                area_px: fields[7].parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad area '{}'", fields[7]),
                })?,
                major_axis_px: parse_f64(fields[8])?,
                minor_axis_px: parse_f64(fields[9])?,
                eccentricity: parse_f64(fields[10])?,
            },
        ));
    }
    Ok(rows)
}

/// Write an `[n, dim]` feature matrix in the `OLCV` binary format.
pub fn write_cnn_features(path: &Path, features: &TensorBuffer) -> Result<()> {
    let shape = features.shape();
    if shape.len() != 2 {
        return Err(Error::dim("write_cnn_features", "[n, dim]", format!("{shape:?}")));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(CNN_FEATURE_MAGIC)?;
    out.write_all(&CNN_FEATURE_VERSION.to_le_bytes())?;
    out.write_all(&(shape[0] as u32).to_le_bytes())?;
    out.write_all(&(shape[1] as u32).to_le_bytes())?;
    for v in features.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Read a feature matrix written by [`write_cnn_features`].
pub fn read_cnn_features(path: &Path) -> Result<TensorBuffer> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != CNN_FEATURE_MAGIC {
        return Err(Error::Parse {
            line: 0,
            message: format!("bad magic {magic:?}, expected OLCV"),
        });
    }
    let mut word = [0u8; 4];
    file.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != CNN_FEATURE_VERSION {
        return Err(Error::Parse {
            line: 0,
            message: format!("unsupported OLCV version {version}"),
        });
    }
    file.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    file.read_exact(&mut word)?;
    let dim = u32::from_le_bytes(word) as usize;
    let mut data = vec![0.0f32; n * dim];
    for v in &mut data {
        file.read_exact(&mut word)?;
        *v = f32::from_le_bytes(word);
    }
    TensorBuffer::from_vec(&[n, dim], data)
}

//! Run artifacts: the replayable `run.manifest`, normalization-statistics
//! files, the epoch log, and the output-directory lock.

use crate::config::RunConfig;
use crate::CliError;
use olconv_core::model::{EpochLog, OlStats};
use olconv_core::segment::PATCH_LEN;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Runtime(format!("cannot hash {}: {e}", path.display())))?;
    Ok((sha256_hex(&bytes), bytes.len() as u64))
}

/// Write `run.manifest`: the command, the config hash, the seed (when
/// any), and a content hash of every named input file.
pub fn write_run_manifest(
    out_dir: &Path,
    command: &str,
    cfg: &RunConfig,
    seed: Option<u64>,
    input_files: &[PathBuf],
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&format!("command={command}\n"));
    out.push_str(&format!(
        "config_sha256={}\n",
        sha256_hex(cfg.canonical_text().as_bytes())
    ));
    match seed {
        Some(seed) => out.push_str(&format!("seed={seed}\n")),
        None => out.push_str("seed=-\n"),
    }
    for path in input_files {
        let (hash, bytes) = sha256_file(path)?;
        out.push_str(&format!("input={} sha256={hash} bytes={bytes}\n", path.display()));
    }
    out.push_str("config:\n");
    out.push_str(&cfg.canonical_text());
    std::fs::write(out_dir.join("run.manifest"), out)
        .map_err(|e| CliError::Runtime(format!("cannot write run.manifest: {e}")))?;
    Ok(())
}

/// Exclusive lock on an output directory. Released on drop.
pub struct OutDirLock {
    path: PathBuf,
}

impl OutDirLock {
    pub fn acquire(out_dir: &Path) -> Result<OutDirLock, CliError> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
        let path = out_dir.join(".olconv.lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutDirLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Usage(
                format!(
                    "output directory {} is locked by another run (remove {} if stale)",
                    out_dir.display(),
                    path.display()
                ),
            )),
            Err(e) => Err(CliError::Runtime(format!(
                "cannot create lock {}: {e}",
                path.display()
            ))),
        }
    }
}

impl Drop for OutDirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Save normalization statistics (mean image + object-level z-score
/// parameters) as a `key=value` text file.
pub fn save_norm_stats(path: &Path, mean_image: &[f32], ol: &OlStats) -> Result<(), CliError> {
    let mut out = String::new();
    let mean_items: Vec<String> = mean_image.iter().map(|v| v.to_string()).collect();
    out.push_str(&format!("mean_image={}\n", mean_items.join(" ")));
    let ol_mean: Vec<String> = ol.mean.iter().map(|v| v.to_string()).collect();
    out.push_str(&format!("ol_mean={}\n", ol_mean.join(" ")));
    let ol_std: Vec<String> = ol.std.iter().map(|v| v.to_string()).collect();
    out.push_str(&format!("ol_std={}\n", ol_std.join(" ")));
    std::fs::write(path, out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Load a file written by [`save_norm_stats`].
pub fn load_norm_stats(path: &Path) -> Result<(Vec<f32>, OlStats), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut mean_image: Option<Vec<f32>> = None;
    let mut ol_mean: Option<Vec<f64>> = None;
    let mut ol_std: Option<Vec<f64>> = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key {
            "mean_image" => {
                mean_image = Some(
                    value
                        .split(' ')
                        .map(|v| v.parse())
                        .collect::<Result<Vec<f32>, _>>()
                        .map_err(|_| CliError::Runtime("bad mean_image values".into()))?,
                )
            }
            "ol_mean" => {
                ol_mean = Some(
                    value
                        .split(' ')
                        .map(|v| v.parse())
                        .collect::<Result<Vec<f64>, _>>()
                        .map_err(|_| CliError::Runtime("bad ol_mean values".into()))?,
                )
            }
            "ol_std" => {
                ol_std = Some(
                    value
                        .split(' ')
                        .map(|v| v.parse())
                        .collect::<Result<Vec<f64>, _>>()
                        .map_err(|_| CliError::Runtime("bad ol_std values".into()))?,
                )
            }
            _ => {}
        }
    }
    let mean_image = mean_image
        .filter(|m| m.len() == PATCH_LEN)
        .ok_or_else(|| CliError::Runtime(format!("{} lacks a valid mean_image", path.display())))?;
    let to_array = |v: Vec<f64>| -> Result<[f64; 9], CliError> {
        v.try_into()
            .map_err(|_| CliError::Runtime("expected 9 object-level statistics".into()))
    };
    let ol = OlStats {
        mean: to_array(ol_mean.ok_or_else(|| CliError::Runtime("missing ol_mean".into()))?)?,
        std: to_array(ol_std.ok_or_else(|| CliError::Runtime("missing ol_std".into()))?)?,
    };
    Ok((mean_image, ol))
}

/// Write the per-epoch log CSV (`epoch,phase,loss,accuracy`).
pub fn save_epoch_log(path: &Path, log: &[EpochLog]) -> Result<(), CliError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?,
    );
    let write = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "epoch,phase,loss,accuracy")?;
        for row in log {
            writeln!(out, "{},{},{},{}", row.epoch, row.phase, row.loss, row.accuracy)?;
        }
        Ok(())
    };
    write(&mut out).map_err(|e| CliError::Runtime(format!("cannot write epoch log: {e}")))?;
    out.flush()
        .map_err(|e| CliError::Runtime(format!("cannot flush epoch log: {e}")))?;
    Ok(())
}

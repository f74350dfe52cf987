//! Flat `key=value` run configuration with command-line overrides.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Every key any subcommand recognizes. Unknown keys are rejected up
/// front so a typo cannot silently fall back to a default.
pub const KNOWN_KEYS: &[&str] = &[
    "data_dir",
    "gt_csv",
    "in_dir",
    "out_dir",
    "run_dir",
    "seed",
    "n_per_class",
    "mode",
    "balance",
    "balance_after_split",
    "k_neighbors",
    "beta",
    "imbalance_threshold",
    "train_ratio",
    "val_ratio",
    "test_ratio",
    "use_2fold",
    "conv_depth",
    "branch_switch",
    "shared_gradient",
    "cnn_lr",
    "cnn_epochs",
    "cnn_batch",
    "mlp_lr",
    "mlp_epochs",
    "mlp_batch",
    "sweep_depths",
    "sweep_lrs",
    "dump_stages",
];

/// Parsed configuration: file contents overridden by `--set` pairs.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn parse_pair(line: &str, origin: &str) -> Result<(String, String), CliError> {
    let (key, value) = line.split_once('=').ok_or_else(|| {
        CliError::Usage(format!("{origin}: expected key=value, got '{line}'"))
    })?;
    let key = key.trim();
    let value = value.trim();
    if !KNOWN_KEYS.contains(&key) {
        return Err(CliError::Usage(format!("{origin}: unknown key '{key}'")));
    }
    Ok((key.to_string(), value.to_string()))
}

impl RunConfig {
    /// Load the optional config file, then apply `--set` overrides
    /// (overrides win).
    pub fn load(file: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let origin = format!("{}:{}", path.display(), idx + 1);
                let (k, v) = parse_pair(line, &origin)?;
                values.insert(k, v);
            }
        }
        for pair in sets {
            let (k, v) = parse_pair(pair, "--set")?;
            values.insert(k, v);
        }
        Ok(RunConfig { values })
    }

    /// Canonical single-line-per-key rendering, used for the config hash.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("missing required config key '{key}'")))
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, CliError> {
        Ok(PathBuf::from(self.require(key)?))
    }

    /// Randomized steps must be seeded explicitly; there is no default.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.parse_required("seed")
    }

    pub fn parse_required<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| {
            CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
        })
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(CliError::Usage(format!(
                "config key '{key}': expected true/false, got '{other}'"
            ))),
        }
    }

    /// Comma-separated list parser for the sweep grids.
    pub fn list_or<T: std::str::FromStr>(
        &self,
        key: &str,
        default: &[T],
    ) -> Result<Vec<T>, CliError>
    where
        T: Clone,
    {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim().parse().map_err(|_| {
                        CliError::Usage(format!("config key '{key}': cannot parse '{item}'"))
                    })
                })
                .collect(),
        }
    }

    /// Fail when the config names a mode other than the subcommand's.
    pub fn check_mode(&self, expected: &str) -> Result<(), CliError> {
        if let Some(mode) = self.get("mode") {
            if mode != expected {
                return Err(CliError::Usage(format!(
                    "config mode '{mode}' conflicts with the '{expected}' subcommand"
                )));
            }
        }
        Ok(())
    }
}

/// The key listing shown in every subcommand's long help.
pub fn keys_help(keys: &[(&str, &str)]) -> String {
    let mut s = String::from("Recognized config keys (key=value in the config file or --set):\n");
    for (key, desc) in keys {
        s.push_str(&format!("  {key:<22} {desc}\n"));
    }
    s
}

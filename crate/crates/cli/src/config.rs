use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::Context;
use cascadekit::dynamics::DEFAULT_BIN_WIDTH;
use cascadekit::topics::{DEFAULT_MIN_COUNT, DEFAULT_TAU};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

pub const CONFIG_ENV: &str = "CASCADEKIT_CONFIG";

/// Every tunable with its default. A run manifest records the fully
/// resolved set, so feeding a manifest back through `--config` reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub threads: usize,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub kinds: Option<Vec<String>>,
    pub tau: f64,
    pub rounds: usize,
    pub holdout: usize,
    pub rng_seed: u64,
    pub min_count: u64,
    pub bin_width: i64,
    pub normalize: bool,
    pub include_bootstrap: bool,
    pub model: String,
    pub epsilon: f64,
    pub time_scale: f64,
    pub fit_normalized: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            threads: 0,
            from: None,
            to: None,
            kinds: None,
            tau: DEFAULT_TAU,
            rounds: 1,
            holdout: 0,
            rng_seed: 0,
            min_count: DEFAULT_MIN_COUNT,
            bin_width: DEFAULT_BIN_WIDTH,
            normalize: false,
            include_bootstrap: false,
            model: "both".into(),
            epsilon: 1.0,
            time_scale: 1.0,
            fit_normalized: false,
        }
    }
}

/// Loads the base parameters from `--config`, else from the environment
/// variable, else the defaults. A manifest is recognized by its `config` key.
pub fn load_params(flag: Option<&Path>) -> anyhow::Result<Params> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from),
    };
    let Some(path) = path else {
        return Ok(Params::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("config {} is not JSON: {e}", path.display())))?;
    if let Some(params) = value.pointer("/config/params") {
        value = params.clone();
    }
    let params = serde_json::from_value(value)
        .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
    Ok(params)
}

/// Overwrites `slot` when the flag was given.
pub fn apply<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    pub params: Params,
    pub log_level: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// sha256 of every input file, keyed by its role.
    pub input_digests: BTreeMap<String, String>,
    pub wall_time_secs: f64,
    /// Peak resident set size of the process, where the platform reports it.
    pub peak_memory_kib: Option<u64>,
    pub record_counts: BTreeMap<String, u64>,
    pub notes: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = BufReader::with_capacity(1 << 16, file);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_memory_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_beside_output() {
        assert_eq!(
            manifest_path(Path::new("out/cascades.jsonl")),
            PathBuf::from("out/cascades.jsonl.manifest.json")
        );
    }

    #[test]
    fn config_accepts_params_or_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let bare = dir.path().join("bare.json");
        std::fs::write(&bare, r#"{"tau": 5.5}"#).unwrap();
        let p = load_params(Some(&bare)).unwrap();
        assert_eq!(p.tau, 5.5);
        assert_eq!(p.rounds, 1);

        let manifest = dir.path().join("m.json");
        std::fs::write(&manifest, r#"{"config": {"params": {"min_count": 4}}}"#).unwrap();
        assert_eq!(load_params(Some(&manifest)).unwrap().min_count, 4);

        let typo = dir.path().join("typo.json");
        std::fs::write(&typo, r#"{"tua": 1}"#).unwrap();
        assert!(load_params(Some(&typo)).is_err());
    }
}

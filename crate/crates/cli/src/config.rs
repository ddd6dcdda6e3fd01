//! Settings resolution (flags > settings file > defaults) and provenance.

use std::fs;
use std::path::{Path, PathBuf};

use amyloid_core::{Label, SubsetPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Keys accepted in a `--config` file, one `key = value` per line (TOML syntax).
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub atlas: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub scans: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub aggregate: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub subset: Option<SubsetPolicy>,
    pub class: Option<Label>,
    #[serde(alias = "C")]
    pub c: Option<f64>,
    pub scale: Option<f64>,
    pub offset: Option<f64>,
    pub tol: Option<f64>,
    pub max_passes: Option<usize>,
    pub calibrate: Option<bool>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub kernel_width: Option<f64>,
    pub ridge_lambda: Option<f64>,
    pub top_k: Option<usize>,
    pub n_scans: Option<usize>,
    pub pos_fraction: Option<f64>,
    pub signal_regions: Option<Vec<u32>>,
    pub suvr_pos: Option<f64>,
    pub suvr_neg: Option<f64>,
    pub baseline: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub reader_flip_prob: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("--config {}: {}", path.display(), e.message())))
    }
}

/// The effective settings of one run, echoed into every output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Settings {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atlas: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regions: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scans: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<PathBuf>,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<SubsetPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svm: Option<SvmSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lime: Option<LimeSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phantom: Option<PhantomSettings>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SvmSettings {
    #[serde(rename = "C")]
    pub c: f64,
    /// `None` means sqrt(feature count).
    pub scale: Option<f64>,
    pub offset: f64,
    pub tol: f64,
    /// `None` means 10 x training rows.
    pub max_passes: Option<usize>,
    pub calibrate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimeSettings {
    pub n_samples: usize,
    /// `None` means 0.75 x sqrt(feature count).
    pub kernel_width: Option<f64>,
    pub ridge_lambda: f64,
    pub top_k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhantomSettings {
    pub n_scans: usize,
    pub pos_fraction: f64,
    /// Empty means the keyword defaults.
    pub signal_regions: Vec<u32>,
    pub suvr_pos: f64,
    pub suvr_neg: f64,
    pub baseline: f64,
    pub noise_sigma: f64,
    pub reader_flip_prob: f64,
}

/// Stamp identifying the tool build and the exact settings behind an output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the compact JSON echo of the effective settings.
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(settings: &Settings) -> Self {
        let echo = serde_json::to_vec(settings).expect("settings serialize");
        let digest = Sha256::digest(&echo);
        Self {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed: settings.seed,
        }
    }

    /// Short form for the 80-byte NIfTI `descrip` field.
    pub fn descrip(&self) -> String {
        format!("{} {} cfg {} seed {}", self.tool, self.version, &self.config_hash[..16], self.seed)
    }
}

/// `{"provenance": .., "config": ..}`, the header every output carries.
pub fn stamp(settings: &Settings) -> serde_json::Value {
    serde_json::json!({ "provenance": Provenance::new(settings), "config": settings })
}

pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// An input path that must be given and must exist.
pub fn required_input(flag: Option<PathBuf>, file: Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    let path = flag
        .or(file)
        .ok_or_else(|| CliError::Usage(format!("missing --{name} (flag or `{name}` in --config)")))?;
    check_exists(path, name)
}

pub fn optional_input(flag: Option<PathBuf>, file: Option<PathBuf>, name: &str) -> CliResult<Option<PathBuf>> {
    flag.or(file).map(|p| check_exists(p, name)).transpose()
}

fn check_exists(path: PathBuf, name: &str) -> CliResult<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Usage(format!("--{name}: no such file or directory: {}", path.display())))
    }
}

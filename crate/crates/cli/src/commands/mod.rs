mod evaluate;
mod explain;
mod extract;
mod kappa;
mod phantom;
mod render;
mod train;

use std::path::{Path, PathBuf};

use amyloid_core::cohort::Cohort;
use amyloid_core::lime::LimeConfig;
use amyloid_core::parcellation::{aal1_region_table, AtlasParcellation, FeatureMatrix, RegionTable};
use amyloid_core::svm::SvmConfig;
use amyloid_core::volume::{read_nifti, Intent};
use amyloid_core::{Dataset, SubsetPolicy};

use crate::cli::{CohortArgs, Command, LimeArgs, SvmArgs};
use crate::config::{pick, required_input, FileConfig, LimeSettings, SvmSettings};
use crate::error::CliResult;

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Extract(a) => extract::run(a),
        Command::Kappa(a) => kappa::run(a),
        Command::Train(a) => train::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Explain(a) => explain::run(a),
        Command::Render(a) => render::run(a),
        Command::Phantom(a) => phantom::run(a),
    }
}

fn out_dir(flag: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    pick(flag, file.out_dir.clone(), PathBuf::from("out"))
}

fn region_table(path: Option<&Path>) -> CliResult<RegionTable> {
    Ok(match path {
        Some(p) => RegionTable::read_csv(p)?,
        None => aal1_region_table(),
    })
}

/// Label volumes without the NIfTI label intent are reinterpreted as labels.
fn load_atlas(path: &Path, regions: Option<&Path>) -> CliResult<AtlasParcellation<f64>> {
    let table = region_table(regions)?;
    let mut vol = read_nifti::<f64>(path)?;
    if vol.intent() != Intent::Labels {
        vol = vol.with_intent(Intent::Labels)?;
    }
    Ok(AtlasParcellation::load(vol, table)?)
}

fn svm_settings(a: &SvmArgs, f: &FileConfig) -> SvmSettings {
    let d = SvmConfig::<f64>::default();
    SvmSettings {
        c: pick(a.c, f.c, d.c),
        scale: a.scale.or(f.scale),
        offset: pick(a.offset, f.offset, d.offset),
        tol: pick(a.tol, f.tol, d.tol),
        max_passes: a.max_passes.or(f.max_passes),
        calibrate: pick(a.calibrate, f.calibrate, d.calibrate),
    }
}

fn svm_config(s: &SvmSettings, seed: u64) -> SvmConfig<f64> {
    SvmConfig {
        c: s.c,
        scale: s.scale,
        offset: s.offset,
        tol: s.tol,
        max_passes: s.max_passes,
        seed,
        calibrate: s.calibrate,
        ..SvmConfig::default()
    }
}

fn lime_settings(a: &LimeArgs, f: &FileConfig) -> LimeSettings {
    let d = LimeConfig::<f64>::default();
    LimeSettings {
        n_samples: pick(a.n_samples, f.n_samples, d.n_samples),
        kernel_width: a.kernel_width.or(f.kernel_width),
        ridge_lambda: pick(a.ridge_lambda, f.ridge_lambda, d.ridge_lambda),
        top_k: pick(a.top_k, f.top_k, d.top_k),
    }
}

fn lime_config(s: &LimeSettings, seed: u64) -> LimeConfig<f64> {
    LimeConfig { n_samples: s.n_samples, kernel_width: s.kernel_width, ridge_lambda: s.ridge_lambda, top_k: s.top_k, seed }
}

/// Resolved cohort inputs shared by train, evaluate and explain.
struct CohortInputs {
    features_path: PathBuf,
    labels_path: PathBuf,
    subset: SubsetPolicy,
}

impl CohortInputs {
    fn resolve(a: &CohortArgs, f: &FileConfig) -> CliResult<Self> {
        Ok(Self {
            features_path: required_input(a.features.clone(), f.features.clone(), "features")?,
            labels_path: required_input(a.labels.clone(), f.labels.clone(), "labels")?,
            subset: a.subset.map(Into::into).or(f.subset).unwrap_or_default(),
        })
    }

    fn load(&self) -> CliResult<(FeatureMatrix<f64>, Dataset)> {
        let features = FeatureMatrix::read_csv(&self.features_path)?;
        let cohort = Cohort::read_csv(&self.labels_path)?;
        let data = cohort.dataset(&features, self.subset)?;
        Ok((features, data))
    }
}

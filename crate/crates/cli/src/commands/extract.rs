use std::fs;
use std::path::{Path, PathBuf};

use amyloid_core::parcellation::{extract_features, FeatureMatrix};
use amyloid_core::volume::read_nifti;
use rayon::prelude::*;

use super::{load_atlas, out_dir};
use crate::cli::ExtractArgs;
use crate::config::{optional_input, required_input, FileConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::output::Outputs;

/// `(scan_id, path)` for every NIfTI file in `dir`, ordered by file name.
fn list_scans(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let stem = name.strip_suffix(".nii.gz").or_else(|| name.strip_suffix(".nii"));
        if let Some(stem) = stem {
            out.push((stem.to_string(), path.clone()));
        }
    }
    out.sort();
    Ok(out)
}

pub fn run(a: ExtractArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let atlas_path = required_input(a.atlas.atlas, f.atlas.clone(), "atlas")?;
    let regions = optional_input(a.atlas.regions, f.regions.clone(), "regions")?;
    let scans = required_input(a.scans, f.scans.clone(), "scans")?;
    let settings = Settings {
        command: "extract",
        atlas: Some(atlas_path.clone()),
        regions: regions.clone(),
        scans: Some(scans.clone()),
        out_dir: out_dir(a.common.out_dir, &f),
        seed: f.seed.unwrap_or(0),
        ..Default::default()
    };

    let atlas = load_atlas(&atlas_path, regions.as_deref())?;
    let files = list_scans(&scans)?;
    if files.is_empty() {
        return Err(CliError::Data(format!("no .nii or .nii.gz files in {}", scans.display())));
    }
    let results: Vec<Result<_, String>> = files
        .par_iter()
        .map(|(id, path)| {
            let vol = read_nifti::<f64>(path).map_err(|e| e.to_string())?;
            extract_features(id, &vol, &atlas).map_err(|e| e.to_string())
        })
        .collect();

    let mut vectors = Vec::with_capacity(files.len());
    let mut failed = 0;
    for ((id, _), r) in files.iter().zip(results) {
        match r {
            Ok(v) => vectors.push(v),
            Err(e) => {
                failed += 1;
                eprintln!("scan {id}: {e}");
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} of {} scans failed; no features written", files.len())));
    }

    let features = FeatureMatrix::from_vectors(vectors)?;
    let out = Outputs::create(&settings)?;
    let path = out.write_text("features.csv", &features.to_csv_string())?;
    println!("{} scans x {} regions -> {}", features.n_rows(), features.n_features(), path.display());
    Ok(())
}

use std::path::PathBuf;

use amyloid_core::parcellation::test_atlas;
use amyloid_core::phantom::{generate_cohort_with, PhantomSpec, PhantomStamp};
use amyloid_core::Label;

use super::load_atlas;
use crate::cli::PhantomArgs;
use crate::config::{optional_input, pick, FileConfig, PhantomSettings, Settings};
use crate::error::CliResult;
use crate::output::Outputs;

pub fn run(a: PhantomArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let atlas_path = optional_input(a.atlas.atlas, f.atlas.clone(), "atlas")?;
    let regions = optional_input(a.atlas.regions, f.regions.clone(), "regions")?;
    let d = PhantomSpec::<f64>::default();
    let ph = PhantomSettings {
        n_scans: pick(a.n_scans, f.n_scans, d.n_scans),
        pos_fraction: pick(a.pos_fraction, f.pos_fraction, d.pos_fraction),
        signal_regions: pick(a.signal_regions, f.signal_regions.clone(), d.signal_regions),
        suvr_pos: pick(a.suvr_pos, f.suvr_pos, d.suvr_pos),
        suvr_neg: pick(a.suvr_neg, f.suvr_neg, d.suvr_neg),
        baseline: pick(a.baseline, f.baseline, d.baseline),
        noise_sigma: pick(a.noise_sigma, f.noise_sigma, d.noise_sigma),
        reader_flip_prob: pick(a.reader_flip_prob, f.reader_flip_prob, d.reader_flip_prob),
    };
    let seed = pick(a.seed, f.seed, 0);
    let settings = Settings {
        command: "phantom",
        atlas: atlas_path.clone(),
        regions: regions.clone(),
        out_dir: pick(a.common.out_dir, f.out_dir.clone(), PathBuf::from("phantom")),
        phantom: Some(ph.clone()),
        seed,
        ..Default::default()
    };

    let atlas = match &atlas_path {
        Some(p) => load_atlas(p, regions.as_deref())?,
        None => test_atlas::<f64>(),
    };
    let spec = PhantomSpec {
        n_scans: ph.n_scans,
        pos_fraction: ph.pos_fraction,
        signal_regions: ph.signal_regions,
        suvr_pos: ph.suvr_pos,
        suvr_neg: ph.suvr_neg,
        baseline: ph.baseline,
        noise_sigma: ph.noise_sigma,
        reader_flip_prob: ph.reader_flip_prob,
        seed,
    };

    let out = Outputs::create(&settings)?;
    let stamp = PhantomStamp { description: Some(out.provenance().descrip()), provenance: Some(out.header().clone()) };
    let generated = generate_cohort_with(&spec, &atlas, out.dir(), &stamp)?;
    for name in ["labels.csv", "truth.csv", "regions.csv", "atlas.nii.gz"] {
        out.write_sidecar(&out.path(name))?;
    }

    let n_pos = generated.truth.iter().filter(|(_, l)| *l == Label::Pos).count();
    println!(
        "{} scans ({n_pos} truly positive), signal regions {:?} -> {}",
        spec.n_scans,
        generated.signal_regions,
        out.dir().display()
    );
    Ok(())
}

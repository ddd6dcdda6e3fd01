use std::fs::File;

use amyloid_core::lime::{project_weights, read_aggregate_csv, AggregateExplanation};
use amyloid_core::volume::{write_nifti_with, WriteOptions};
use amyloid_core::Label;

use super::{load_atlas, out_dir};
use crate::cli::RenderArgs;
use crate::config::{optional_input, required_input, FileConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::output::Outputs;

pub fn run(a: RenderArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let atlas_path = required_input(a.atlas.atlas, f.atlas.clone(), "atlas")?;
    let regions = optional_input(a.atlas.regions, f.regions.clone(), "regions")?;
    let aggregate_path = required_input(a.aggregate, f.aggregate.clone(), "aggregate")?;
    let class: Label = a.class.map(Into::into).or(f.class).unwrap_or(Label::Pos);
    let settings = Settings {
        command: "render",
        atlas: Some(atlas_path.clone()),
        regions: regions.clone(),
        aggregate: Some(aggregate_path.clone()),
        out_dir: out_dir(a.common.out_dir, &f),
        class: Some(class),
        seed: f.seed.unwrap_or(0),
        ..Default::default()
    };

    let atlas = load_atlas(&atlas_path, regions.as_deref())?;
    let aggregates: Vec<AggregateExplanation<f64>> = read_aggregate_csv(File::open(&aggregate_path)?)?;
    let agg = aggregates
        .iter()
        .find(|g| g.class == class)
        .ok_or_else(|| CliError::Data(format!("{}: no rows for class {class}", aggregate_path.display())))?;
    let map = project_weights(agg, &atlas)?;

    let out = Outputs::create(&settings)?;
    let path = out.path("weightmap.nii.gz");
    let opts = WriteOptions { description: out.provenance().descrip(), ..Default::default() };
    write_nifti_with(&map, &path, &opts)?;
    out.write_sidecar(&path)?;
    println!("{class} weights over {} regions -> {}", agg.regions.len(), path.display());
    Ok(())
}

use amyloid_core::lime::{aggregate_by_class, aggregate_csv, explain_all, instances_csv};
use amyloid_core::parcellation::FeatureMatrix;
use amyloid_core::svm::{load_model, smo_train};
use log::info;

use super::{lime_config, lime_settings, out_dir, region_table, svm_config, svm_settings, CohortInputs};
use crate::cli::ExplainArgs;
use crate::config::{optional_input, pick, required_input, FileConfig, Settings};
use crate::error::CliResult;
use crate::output::Outputs;

/// Explains every row of the feature matrix, with a supplied model or one
/// trained on the labelled subset.
pub fn run(a: ExplainArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let model_path = optional_input(a.model, f.model.clone(), "model")?;
    let regions = optional_input(a.regions, f.regions.clone(), "regions")?;
    let lime = lime_settings(&a.lime, &f);
    let seed = pick(a.seed, f.seed, 0);

    let (features_path, labels_path, subset, svm) = if model_path.is_some() {
        let features = required_input(a.cohort.features.clone(), f.features.clone(), "features")?;
        (features, None, None, None)
    } else {
        let inputs = CohortInputs::resolve(&a.cohort, &f)?;
        let svm = svm_settings(&a.svm, &f);
        (inputs.features_path, Some(inputs.labels_path), Some(inputs.subset), Some(svm))
    };
    let settings = Settings {
        command: "explain",
        regions: regions.clone(),
        features: Some(features_path.clone()),
        labels: labels_path.clone(),
        model: model_path.clone(),
        out_dir: out_dir(a.common.out_dir, &f),
        subset,
        svm: svm.clone(),
        lime: Some(lime.clone()),
        seed,
        ..Default::default()
    };

    let table = region_table(regions.as_deref())?;
    let (model, features) = match (&model_path, &labels_path, &svm, subset) {
        (Some(p), ..) => (load_model::<f64>(p)?, FeatureMatrix::read_csv(&features_path)?),
        (None, Some(labels), Some(svm), Some(subset)) => {
            let inputs = CohortInputs { features_path: features_path.clone(), labels_path: labels.clone(), subset };
            let (features, data) = inputs.load()?;
            info!("training on {} labelled scans", data.len());
            (smo_train(&data.features, &data.labels, &svm_config(svm, seed))?, features)
        }
        _ => unreachable!("labels are resolved whenever no model is given"),
    };

    let explanations = explain_all(&model, &features, &lime_config(&lime, seed))?;
    let aggregates = aggregate_by_class(&explanations);

    let out = Outputs::create(&settings)?;
    out.write_text("lime_instances.csv", &instances_csv(&explanations, &table))?;
    out.write_text("lime_aggregate.csv", &aggregate_csv(&aggregates, &table))?;

    let r2: Vec<f64> = explanations.iter().map(|e| e.local_fidelity_r2).collect();
    let mean_r2 = r2.iter().sum::<f64>() / r2.len().max(1) as f64;
    println!("explained {} scans, mean local R^2 {mean_r2:.3}", explanations.len());
    for agg in &aggregates {
        let top: Vec<String> = agg
            .regions
            .iter()
            .take(5)
            .map(|r| table.name(r.region_id).map_or_else(|| r.region_id.to_string(), str::to_string))
            .collect();
        println!("{} ({} scans): {}", agg.class, agg.n_instances, top.join(", "));
    }
    Ok(())
}

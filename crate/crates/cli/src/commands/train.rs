use amyloid_core::svm::{save_model, smo_train};

use super::{out_dir, svm_config, svm_settings, CohortInputs};
use crate::cli::TrainArgs;
use crate::config::{pick, FileConfig, Settings};
use crate::error::CliResult;
use crate::output::Outputs;

pub fn run(a: TrainArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let inputs = CohortInputs::resolve(&a.cohort, &f)?;
    let svm = svm_settings(&a.svm, &f);
    let seed = pick(a.seed, f.seed, 0);
    let settings = Settings {
        command: "train",
        features: Some(inputs.features_path.clone()),
        labels: Some(inputs.labels_path.clone()),
        out_dir: out_dir(a.common.out_dir, &f),
        subset: Some(inputs.subset),
        svm: Some(svm.clone()),
        seed,
        ..Default::default()
    };

    let (_, data) = inputs.load()?;
    let mut model = smo_train(&data.features, &data.labels, &svm_config(&svm, seed))?;
    let out = Outputs::create(&settings)?;
    model.provenance = Some(out.header().clone());
    let path = out.path("model.json");
    save_model(&model, &path)?;
    let (pos, neg) = data.class_counts();
    println!(
        "trained on {} scans ({pos} pos, {neg} neg): {} support vectors -> {}",
        data.len(),
        model.support_vectors.len(),
        path.display()
    );
    Ok(())
}

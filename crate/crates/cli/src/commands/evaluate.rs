use std::collections::HashMap;
use std::fmt::Write;

use amyloid_core::evaluation::{cross_validate, score_predictions};
use amyloid_core::phantom::read_truth_csv;
use amyloid_core::{Label, Metric};
use serde_json::json;

use super::{out_dir, svm_config, svm_settings, CohortInputs};
use crate::cli::EvaluateArgs;
use crate::config::{optional_input, pick, FileConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::svg::roc_svg;

pub fn run(a: EvaluateArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let inputs = CohortInputs::resolve(&a.cohort, &f)?;
    let truth_path = optional_input(a.truth, f.truth.clone(), "truth")?;
    let svm = svm_settings(&a.svm, &f);
    let seed = pick(a.seed, f.seed, 0);
    let k = pick(a.k, f.k, 5);
    if k < 2 {
        return Err(CliError::Usage(format!("--k must be at least 2, got {k}")));
    }
    let settings = Settings {
        command: "evaluate",
        features: Some(inputs.features_path.clone()),
        labels: Some(inputs.labels_path.clone()),
        truth: truth_path.clone(),
        out_dir: out_dir(a.common.out_dir, &f),
        subset: Some(inputs.subset),
        svm: Some(svm.clone()),
        k: Some(k),
        seed,
        ..Default::default()
    };

    let (_, data) = inputs.load()?;
    let cv = cross_validate(&data, k, seed, &svm_config(&svm, seed))?;

    // Held-out scores are rescored against the truth file when one is given.
    let truth: Option<HashMap<String, Label>> = match &truth_path {
        Some(p) => Some(read_truth_csv(p)?.into_iter().collect()),
        None => None,
    };
    let reference: Vec<Label> = match &truth {
        Some(t) => cv
            .predictions
            .iter()
            .map(|p| t.get(&p.scan_id).copied().ok_or_else(|| CliError::Data(format!("scan {} missing from truth file", p.scan_id))))
            .collect::<CliResult<_>>()?,
        None => cv.predictions.iter().map(|p| p.label).collect(),
    };
    let scores: Vec<f64> = cv.predictions.iter().map(|p| p.decision_value).collect();
    let summary = score_predictions(&scores, &reference)?;
    let scored_against = if truth.is_some() { "truth" } else { "labels" };

    let out = Outputs::create(&settings)?;
    out.write_json(
        "metrics.json",
        json!({
            "scored_against": scored_against,
            "n_scans": cv.n,
            "counts": summary.counts,
            "metrics": summary.metrics,
            "auc": summary.auc,
            "cross_validation": cv,
        }),
    )?;
    out.write_text("roc.csv", &summary.roc.to_csv_string())?;
    let svg = roc_svg(
        &summary.roc.points,
        summary.auc,
        &format!("{k}-fold cross-validation, n = {}", cv.n),
        &serde_json::to_string(out.provenance()).expect("json"),
    );
    out.write_text("roc.svg", &svg)?;

    let mut csv = String::from("scan_id,fold,label,reference,decision_value,predicted\n");
    for (p, r) in cv.predictions.iter().zip(&reference) {
        let _ = writeln!(csv, "{},{},{},{},{},{}", p.scan_id, p.fold, p.label, r, p.decision_value, p.predicted);
    }
    out.write_text("predictions.csv", &csv)?;

    let m = &summary.metrics;
    println!("scored against {scored_against}, {k}-fold, n = {}", cv.n);
    println!("accuracy     {}", fmt_metric(m.accuracy));
    println!("sensitivity  {}", fmt_metric(m.sensitivity));
    println!("specificity  {}", fmt_metric(m.specificity));
    println!("auc          {:.4}", summary.auc);
    Ok(())
}

fn fmt_metric(m: Metric<f64>) -> String {
    m.value().map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
}

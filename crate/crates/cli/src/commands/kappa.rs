use std::fs;

use amyloid_core::cohort::{Cohort, CohortError};
use serde_json::json;

use crate::cli::KappaArgs;
use crate::config::{required_input, FileConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::output::Outputs;

pub fn run(a: KappaArgs) -> CliResult<()> {
    let f = FileConfig::load(a.common.config.as_deref())?;
    let labels = required_input(a.labels, f.labels.clone(), "labels")?;
    let out_dir = a.common.out_dir.or(f.out_dir.clone());

    let empty = || CliError::Usage(format!("--labels {}: no label rows", labels.display()));
    if fs::read_to_string(&labels)?.trim().is_empty() {
        return Err(empty());
    }
    let cohort = match Cohort::read_csv(&labels) {
        Err(CohortError::EmptyCohort) => return Err(empty()),
        r => r?,
    };
    let agreement = cohort.agreement::<f64>()?;
    let t = agreement.table;

    let settings = Settings {
        command: "kappa",
        labels: Some(labels.clone()),
        out_dir: out_dir.clone().unwrap_or_default(),
        seed: f.seed.unwrap_or(0),
        ..Default::default()
    };
    let report = json!({
        "n_scans": cohort.len(),
        "contingency": t,
        "agreement": agreement.observed,
        "expected_agreement": agreement.expected,
        "kappa": agreement.kappa,
    });
    if a.json {
        let mut doc = crate::config::stamp(&settings);
        doc.as_object_mut().expect("object").extend(report.as_object().cloned().unwrap_or_default());
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        println!("scans      {}", cohort.len());
        println!("agreement  {:.4}", agreement.observed);
        println!("kappa      {:.4}", agreement.kappa);
    }
    if out_dir.is_some() {
        Outputs::create(&settings)?.write_json("kappa.json", report)?;
    }
    Ok(())
}

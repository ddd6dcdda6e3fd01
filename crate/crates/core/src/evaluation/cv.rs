use rayon::prelude::*;
use serde::Serialize;

use super::kfold::stratified_kfold;
use super::metrics::{ConfusionCounts, Metrics};
use super::roc::{score_predictions, RocCurve};
use super::EvalError;
use crate::cohort::Dataset;
use crate::svm::{smo_train, Standardization, SvmConfig, SvmModel};
use crate::{Label, Scalar};

/// What a fold trained on, handed to the audit hook before its test rows are scored.
#[derive(Debug)]
pub struct FoldAudit<'a, T> {
    pub fold: usize,
    pub train_indices: &'a [usize],
    pub test_indices: &'a [usize],
    pub standardization: &'a Standardization<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvPrediction<T> {
    pub scan_id: String,
    pub fold: usize,
    pub label: Label,
    pub decision_value: T,
    pub predicted: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct FoldReport<T> {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_support_vectors: usize,
    pub counts: ConfusionCounts,
    pub metrics: Metrics<T>,
    pub auc: T,
}

/// Held-out predictions pooled over all folds, plus per-fold summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct CvReport<T> {
    pub k: usize,
    pub seed: u64,
    pub n: usize,
    pub counts: ConfusionCounts,
    pub metrics: Metrics<T>,
    pub auc: T,
    pub per_fold: Vec<FoldReport<T>>,
    #[serde(skip)]
    pub roc: RocCurve<T>,
    /// In dataset row order.
    #[serde(skip)]
    pub predictions: Vec<CvPrediction<T>>,
}

impl<T: Scalar> CvReport<T> {
    pub fn decision_values(&self) -> Vec<T> {
        self.predictions.iter().map(|p| p.decision_value).collect()
    }
}

pub fn cross_validate<T: Scalar>(data: &Dataset<T>, k: usize, seed: u64, config: &SvmConfig<T>) -> Result<CvReport<T>, EvalError> {
    cross_validate_with(data, k, seed, config, &|_: &FoldAudit<'_, T>| {})
}

/// [`cross_validate`] with a hook called once per fold after training.
///
/// Folds train in parallel; reports are assembled in fold order so the
/// result does not depend on scheduling.
pub fn cross_validate_with<T: Scalar>(
    data: &Dataset<T>,
    k: usize,
    seed: u64,
    config: &SvmConfig<T>,
    audit: &(dyn Fn(&FoldAudit<'_, T>) + Sync),
) -> Result<CvReport<T>, EvalError> {
    let folds = stratified_kfold(&data.labels, k, seed)?;
    let n = data.len();

    let fitted: Vec<(Vec<usize>, SvmModel<T>)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; n];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let features = data.features.select(&train);
            let labels: Vec<Label> = train.iter().map(|&i| data.labels[i]).collect();
            let fold_config = SvmConfig { seed: config.seed.wrapping_add(f as u64), ..config.clone() };
            let model = smo_train(&features, &labels, &fold_config)?;
            audit(&FoldAudit { fold: f, train_indices: &train, test_indices: test, standardization: &model.standardization });
            Ok((train, model))
        })
        .collect::<Result<_, EvalError>>()?;

    let mut decision = vec![T::zero(); n];
    let mut fold_of = vec![0; n];
    let mut per_fold = Vec::with_capacity(k);
    for (f, (test, (train, model))) in folds.iter().zip(&fitted).enumerate() {
        let scores: Vec<T> = test
            .iter()
            .map(|&i| model.decision_value(data.features.row(i)))
            .collect::<Result<_, _>>()?;
        let labels: Vec<Label> = test.iter().map(|&i| data.labels[i]).collect();
        let s = score_predictions(&scores, &labels)?;
        for (&i, &v) in test.iter().zip(&scores) {
            decision[i] = v;
            fold_of[i] = f;
        }
        per_fold.push(FoldReport {
            fold: f,
            n_train: train.len(),
            n_test: test.len(),
            n_support_vectors: model.support_vectors.len(),
            counts: s.counts,
            metrics: s.metrics,
            auc: s.auc,
        });
    }

    let pooled = score_predictions(&decision, &data.labels)?;
    let predictions = (0..n)
        .map(|i| CvPrediction {
            scan_id: data.features.scan_ids()[i].clone(),
            fold: fold_of[i],
            label: data.labels[i],
            decision_value: decision[i],
            predicted: Label::from_decision(decision[i]),
        })
        .collect();
    Ok(CvReport {
        k,
        seed,
        n,
        counts: pooled.counts,
        metrics: pooled.metrics,
        auc: pooled.auc,
        per_fold,
        roc: pooled.roc,
        predictions,
    })
}

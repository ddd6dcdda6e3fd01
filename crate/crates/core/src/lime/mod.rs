//! Local surrogate explanations over regional features.
//!
//! Around one scan, in the model's standardized feature space, the black box
//! is evaluated on Gaussian perturbations, the samples are weighted by an
//! exponential kernel on distance, and a weighted ridge regression is fitted.
//! Its coefficients are the region weights; positive weight pushes toward `Pos`.

mod aggregate;
mod ridge;
mod sampling;

pub use aggregate::{
    aggregate_by_class, aggregate_explanations, aggregate_csv, instances_csv, project_weights, read_aggregate_csv,
    AggregateExplanation, AggregateRegion,
};
pub use ridge::{weighted_r2, weighted_ridge, RidgeFit};
pub use sampling::{instance_seed, kernel_weights, sample_perturbations};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parcellation::{FeatureMatrix, FeatureVector};
use crate::svm::{SvmError, SvmModel};
use crate::{Label, Scalar};

#[derive(Debug, Error)]
pub enum LimeError {
    #[error("weighted ridge system is singular")]
    SingularSystem,
    #[error("invalid LIME configuration: {0}")]
    InvalidConfig(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no explanations for class {0}")]
    EmptyClass(Label),
    #[error("region {0} is not in the atlas")]
    UnknownRegion(u32),
    #[error("feature regions {found:?} do not match the model's {expected:?}")]
    RegionMismatch { expected: Vec<u32>, found: Vec<u32> },
    #[error("aggregate file: {0}")]
    BadAggregate(String),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Volume(#[from] crate::volume::VolumeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig<T> {
    pub n_samples: usize,
    /// Kernel width in standardized units; `None` selects `0.75 * sqrt(d)`.
    pub kernel_width: Option<T>,
    pub ridge_lambda: T,
    pub top_k: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for LimeConfig<T> {
    fn default() -> Self {
        Self { n_samples: 5000, kernel_width: None, ridge_lambda: T::one(), top_k: 10, seed: 0 }
    }
}

impl<T: Scalar> LimeConfig<T> {
    pub fn width_for(&self, n_features: usize) -> T {
        self.kernel_width.unwrap_or_else(|| T::lit(0.75) * T::count(n_features).sqrt())
    }

    pub fn validate(&self, n_features: usize) -> Result<(), LimeError> {
        let bad = |m: String| Err(LimeError::InvalidConfig(m));
        if self.n_samples < 100 {
            return bad(format!("n_samples must be at least 100, got {}", self.n_samples));
        }
        if self.top_k == 0 || self.top_k > n_features {
            return bad(format!("top_k must be in 1..={n_features}, got {}", self.top_k));
        }
        if !(self.ridge_lambda >= T::zero()) || !self.ridge_lambda.is_finite() {
            return bad(format!("ridge_lambda must be non-negative, got {}", self.ridge_lambda));
        }
        let w = self.width_for(n_features);
        if !(w > T::zero()) || !w.is_finite() {
            return bad(format!("kernel_width must be positive, got {w}"));
        }
        Ok(())
    }
}

/// A function explained in standardized feature space.
pub trait BlackBox<T>: Sync {
    /// Target value regressed by the surrogate.
    fn evaluate(&self, z: &[T]) -> T;

    /// Class the black box assigns at `z`.
    fn classify(&self, z: &[T]) -> Label;
}

/// Explains the calibrated probability of `Pos` when available, else the decision value.
impl<T: Scalar> BlackBox<T> for SvmModel<T> {
    fn evaluate(&self, z: &[T]) -> T {
        let f = self.decision_unchecked(z);
        match &self.calibration {
            Some(p) => p.probability(f),
            None => f,
        }
    }

    fn classify(&self, z: &[T]) -> Label {
        Label::from_decision(self.decision_unchecked(z))
    }
}

/// Plain functions are explained as-is and classified by sign.
impl<T: Scalar, F: Fn(&[T]) -> T + Sync> BlackBox<T> for F {
    fn evaluate(&self, z: &[T]) -> T {
        self(z)
    }

    fn classify(&self, z: &[T]) -> Label {
        Label::from_decision(self(z))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation<T> {
    pub scan_id: String,
    pub predicted_class: Label,
    /// `(region_id, weight)`, strongest first, `top_k` entries.
    pub region_weights: Vec<(u32, T)>,
    pub intercept: T,
    pub local_fidelity_r2: T,
}

/// Fits the surrogate around a standardized row `z` with features `region_ids`.
pub fn explain_with<T: Scalar, B: BlackBox<T> + ?Sized>(
    black_box: &B,
    scan_id: &str,
    z: &[T],
    region_ids: &[u32],
    cfg: &LimeConfig<T>,
) -> Result<Explanation<T>, LimeError> {
    if z.len() != region_ids.len() {
        return Err(LimeError::LengthMismatch { expected: region_ids.len(), found: z.len() });
    }
    cfg.validate(z.len())?;
    let samples = sample_perturbations(z, cfg.n_samples, instance_seed(cfg.seed, scan_id));
    let targets: Vec<T> = samples.iter().map(|s| black_box.evaluate(s)).collect();
    let weights = kernel_weights(&samples, z, cfg.width_for(z.len()));
    let fit = weighted_ridge(&samples, &targets, &weights, cfg.ridge_lambda)?;
    let r2 = weighted_r2(&fit, &samples, &targets, &weights);

    let mut ranked: Vec<(u32, T)> = region_ids.iter().copied().zip(fit.coefficients.iter().copied()).collect();
    ranked.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).expect("finite weights").then(a.0.cmp(&b.0)));
    ranked.truncate(cfg.top_k);
    Ok(Explanation {
        scan_id: scan_id.to_string(),
        predicted_class: black_box.classify(z),
        region_weights: ranked,
        intercept: fit.intercept,
        local_fidelity_r2: r2,
    })
}

pub fn explain_instance<T: Scalar>(model: &SvmModel<T>, x: &FeatureVector<T>, cfg: &LimeConfig<T>) -> Result<Explanation<T>, LimeError> {
    if x.region_ids != model.feature_region_ids {
        return Err(LimeError::RegionMismatch { expected: model.feature_region_ids.clone(), found: x.region_ids.clone() });
    }
    let z = model.standardization.apply(&x.values)?;
    explain_with(model, &x.scan_id, &z, &model.feature_region_ids, cfg)
}

/// Explains every row of `features`, in parallel, returning results in row order.
pub fn explain_all<T: Scalar>(model: &SvmModel<T>, features: &FeatureMatrix<T>, cfg: &LimeConfig<T>) -> Result<Vec<Explanation<T>>, LimeError> {
    (0..features.n_rows())
        .into_par_iter()
        .map(|i| explain_instance(model, &features.vector(i), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, lambda: f64, top_k: usize) -> LimeConfig<f64> {
        LimeConfig { n_samples: n, kernel_width: None, ridge_lambda: lambda, top_k, seed: 3 }
    }

    #[test]
    fn linear_black_box_recovered() {
        let beta = [0.5, -2.0, 0.0, 1.25];
        let f = |z: &[f64]| 0.3 + z.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
        let e = explain_with(&f, "s1", &[0.1, -0.4, 2.0, 0.0], &[10, 20, 30, 40], &cfg(1000, 1e-10, 4)).unwrap();
        let lookup = |id: u32| e.region_weights.iter().find(|(r, _)| *r == id).unwrap().1;
        for (id, b) in [10, 20, 30, 40].into_iter().zip(beta) {
            assert!((lookup(id) - b).abs() < 1e-6);
        }
        assert_eq!(e.region_weights[0].0, 20);
        assert!((e.local_fidelity_r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_black_box() {
        let f = |_: &[f64]| 0.7;
        let e = explain_with(&f, "s", &[0.0, 1.0, 2.0], &[1, 2, 3], &cfg(200, 1.0, 3)).unwrap();
        assert!(e.region_weights.iter().all(|&(_, w)| w == 0.0));
        assert_eq!(e.local_fidelity_r2, 0.0);
        // all ties: ranked by region id
        assert_eq!(e.region_weights.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn deterministic_per_scan() {
        let f = |z: &[f64]| (z[0] - z[1]).tanh();
        let a = explain_with(&f, "scan_7", &[0.2, 0.1], &[1, 2], &cfg(300, 1.0, 2)).unwrap();
        let b = explain_with(&f, "scan_7", &[0.2, 0.1], &[1, 2], &cfg(300, 1.0, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_checks() {
        assert!(cfg(99, 1.0, 1).validate(3).is_err());
        assert!(cfg(100, 1.0, 4).validate(3).is_err());
        assert!(cfg(100, -1.0, 1).validate(3).is_err());
        assert!(cfg(100, 0.0, 3).validate(3).is_ok());
        assert!((LimeConfig::<f64>::default().width_for(16) - 3.0).abs() < 1e-15);
    }
}

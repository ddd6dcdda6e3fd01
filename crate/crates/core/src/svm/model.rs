use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::{gram_matrix, KernelParams};
use super::platt::{platt_calibrate, PlattParams};
use super::smo::{smo_solve, SmoParams};
use super::standardize::{standardize_fit, Standardization};
use super::SvmError;
use crate::cohort::Label;
use crate::fsutil::write_atomic;
use crate::parcellation::FeatureMatrix;
use crate::Scalar;

/// Schema version written to and required from model documents.
pub const MODEL_VERSION: u32 = 1;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig<T> {
    #[serde(rename = "C")]
    pub c: T,
    /// Kernel scale `s`; `None` selects `sqrt(d)`.
    pub scale: Option<T>,
    pub offset: T,
    pub tol: T,
    /// SMO pass budget; `None` selects `10 * n`.
    pub max_passes: Option<usize>,
    pub seed: u64,
    /// Fit a Platt sigmoid on the training decision values.
    pub calibrate: bool,
    pub platt_max_iter: usize,
}

impl<T: Scalar> Default for SvmConfig<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            scale: None,
            offset: T::one(),
            tol: T::lit(1e-3),
            max_passes: None,
            seed: 0,
            calibrate: true,
            platt_max_iter: 100,
        }
    }
}

impl<T: Scalar> SvmConfig<T> {
    pub fn kernel_for(&self, n_features: usize) -> Result<KernelParams<T>, SvmError> {
        let auto = KernelParams::auto(n_features);
        KernelParams::cubic(self.scale.unwrap_or(auto.scale), self.offset)
    }
}

/// A trained classifier. Support vectors are stored in standardized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel<T> {
    pub version: u32,
    pub kernel: KernelParams<T>,
    #[serde(rename = "C")]
    pub c: T,
    pub bias: T,
    pub standardization: Standardization<T>,
    pub support_vectors: Vec<Vec<T>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coeffs: Vec<T>,
    pub calibration: Option<PlattParams<T>>,
    pub feature_region_ids: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl<T: Scalar> SvmModel<T> {
    pub fn n_features(&self) -> usize {
        self.standardization.n_features()
    }

    /// Decision value for a row already in standardized units.
    pub fn decision_value_standardized(&self, z: &[T]) -> Result<T, SvmError> {
        if z.len() != self.n_features() {
            return Err(SvmError::LengthMismatch { expected: self.n_features(), found: z.len() });
        }
        Ok(self.decision_unchecked(z))
    }

    pub(crate) fn decision_unchecked(&self, z: &[T]) -> T {
        self.support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .fold(self.bias, |acc, (sv, &c)| acc + c * self.kernel.eval(sv, z))
    }

    /// `f(x) = sum_i coef_i K(sv_i, standardize(x)) + b` for a raw feature row.
    pub fn decision_value(&self, x: &[T]) -> Result<T, SvmError> {
        let z = self.standardization.apply(x)?;
        Ok(self.decision_unchecked(&z))
    }

    pub fn decision_values(&self, rows: &[Vec<T>]) -> Result<Vec<T>, SvmError> {
        rows.iter().map(|r| self.decision_value(r)).collect()
    }

    /// Calibrated probability of `Pos`, when the model carries a calibration.
    pub fn probability(&self, x: &[T]) -> Result<Option<T>, SvmError> {
        let f = self.decision_value(x)?;
        Ok(self.calibration.map(|p| p.probability(f)))
    }

    pub fn predict(&self, x: &[T]) -> Result<Label, SvmError> {
        self.decision_value(x).map(Label::from_decision)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(doc: &str) -> Result<Self, SvmError> {
        let value: serde_json::Value =
            serde_json::from_str(doc).map_err(|e| SvmError::SchemaViolation(format!("malformed JSON: {e}")))?;
        let found = value
            .get("version")
            .ok_or_else(|| SvmError::SchemaViolation("missing field `version`".into()))?;
        if found.as_u64() != Some(MODEL_VERSION as u64) {
            return Err(SvmError::SchemaViolation(format!(
                "unsupported version: expected {MODEL_VERSION}, found {found}"
            )));
        }
        let model: Self = serde_json::from_value(value).map_err(|e| SvmError::SchemaViolation(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    /// Structural checks on a deserialized model.
    pub fn validate(&self) -> Result<(), SvmError> {
        let bad = |m: String| Err(SvmError::SchemaViolation(m));
        self.kernel.validate().map_err(|e| SvmError::SchemaViolation(e.to_string()))?;
        let d = self.n_features();
        if self.standardization.stds.len() != d || self.feature_region_ids.len() != d {
            return bad(format!(
                "inconsistent feature counts: means {d}, stds {}, region ids {}",
                self.standardization.stds.len(),
                self.feature_region_ids.len()
            ));
        }
        if self.standardization.stds.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
            return bad("standardization stds must be positive".into());
        }
        if !(self.c > T::zero()) || !self.c.is_finite() || !self.bias.is_finite() {
            return bad("C must be positive and bias finite".into());
        }
        if self.support_vectors.len() != self.dual_coeffs.len() {
            return bad(format!(
                "{} support vectors but {} dual coefficients",
                self.support_vectors.len(),
                self.dual_coeffs.len()
            ));
        }
        if let Some(sv) = self.support_vectors.iter().find(|sv| sv.len() != d) {
            return bad(format!("support vector of length {}, expected {d}", sv.len()));
        }
        let slack = self.c * T::lit(1e-9);
        if self.dual_coeffs.iter().any(|&a| !(a != T::zero()) || a.abs() > self.c + slack) {
            return bad("dual coefficients must satisfy 0 < |coef| <= C".into());
        }
        let sum: T = self.dual_coeffs.iter().copied().sum();
        let limit = (T::lit(1e-8) * self.c * T::count(self.dual_coeffs.len().max(1))).max(T::epsilon() * self.c * T::lit(64.0));
        if sum.abs() > limit {
            return bad(format!("dual coefficients sum to {sum}, expected 0"));
        }
        Ok(())
    }
}

/// Standardizes `rows`, solves the dual, and keeps the support vectors.
pub fn smo_train<T: Scalar>(features: &FeatureMatrix<T>, labels: &[Label], config: &SvmConfig<T>) -> Result<SvmModel<T>, SvmError> {
    train_rows(features.rows(), features.region_ids().to_vec(), labels, config)
}

pub(crate) fn train_rows<T: Scalar>(
    rows: &[Vec<T>],
    region_ids: Vec<u32>,
    labels: &[Label],
    config: &SvmConfig<T>,
) -> Result<SvmModel<T>, SvmError> {
    if rows.len() != labels.len() {
        return Err(SvmError::LengthMismatch { expected: rows.len(), found: labels.len() });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SvmError::InvalidInput("features contain NaN or infinite values".into()));
    }
    let standardization = standardize_fit(rows)?;
    if region_ids.len() != standardization.n_features() {
        return Err(SvmError::LengthMismatch { expected: standardization.n_features(), found: region_ids.len() });
    }
    let z: Vec<Vec<T>> = rows.iter().map(|r| standardization.apply_unchecked(r)).collect();
    let y: Vec<T> = labels.iter().map(|l| l.sign()).collect();
    let kernel = config.kernel_for(standardization.n_features())?;
    let gram = gram_matrix(&z, &kernel);
    let params = SmoParams { max_passes: config.max_passes, ..SmoParams::new(config.c, config.tol, config.seed) };
    let sol = smo_solve(&gram, &y, &params, None)?;
    log::debug!(
        "smo: {} passes, {} updates, objective {}, max KKT violation {}",
        sol.passes,
        sol.updates,
        sol.objective,
        sol.max_violation
    );

    let calibration = if config.calibrate {
        let f: Vec<T> = gram.iter().map(|row| sol.decision(&y, row)).collect();
        Some(platt_calibrate(&f, &y, config.platt_max_iter)?)
    } else {
        None
    };

    let (support_vectors, dual_coeffs) = sol
        .alpha
        .iter()
        .zip(&y)
        .zip(z)
        .filter(|((&a, _), _)| a > T::zero())
        .map(|((&a, &yi), zi)| (zi, a * yi))
        .unzip();

    Ok(SvmModel {
        version: MODEL_VERSION,
        kernel,
        c: config.c,
        bias: sol.bias,
        standardization,
        support_vectors,
        dual_coeffs,
        calibration,
        feature_region_ids: region_ids,
        provenance: None,
    })
}

pub fn save_model<T: Scalar>(model: &SvmModel<T>, path: impl AsRef<Path>) -> Result<(), SvmError> {
    let mut doc = model.to_json();
    doc.push('\n');
    write_atomic(path.as_ref(), doc.as_bytes())?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<SvmModel<T>, SvmError> {
    let doc = std::fs::read_to_string(path)?;
    SvmModel::from_json(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let labels = rows
            .iter()
            .enumerate()
            .map(|(i, r)| if i == 0 || (i != 1 && r[0] + 0.5 * r[1] * r[1] > 0.5) { Label::Pos } else { Label::Neg })
            .collect();
        (rows, labels)
    }

    fn train(rows: &[Vec<f64>], labels: &[Label], cfg: &SvmConfig<f64>) -> SvmModel<f64> {
        let ids = (1..=rows[0].len() as u32).collect();
        train_rows(rows, ids, labels, cfg).unwrap()
    }

    #[test]
    fn two_point_model() {
        let rows = vec![vec![-1.0], vec![1.0]];
        let labels = [Label::Neg, Label::Pos];
        let m = train(&rows, &labels, &SvmConfig { calibrate: false, ..Default::default() });
        assert!(m.decision_value(&[-1.0]).unwrap() < 0.0);
        assert!(m.decision_value(&[1.0]).unwrap() > 0.0);
        assert!(m.decision_value(&[0.0]).unwrap().abs() < 1e-3);
        assert_eq!(m.predict(&[0.5]).unwrap(), Label::Pos);
    }

    #[test]
    fn free_support_vectors_sit_on_margin() {
        let (rows, labels) = random_problem(40, 3, 7);
        let cfg = SvmConfig { c: 10.0, calibrate: false, ..Default::default() };
        let m = train(&rows, &labels, &cfg);
        let mut free = 0;
        for (sv, &coef) in m.support_vectors.iter().zip(&m.dual_coeffs) {
            if coef.abs() < cfg.c {
                free += 1;
                let y = coef.signum();
                let margin = y * m.decision_value_standardized(sv).unwrap();
                assert!((margin - 1.0).abs() <= cfg.tol, "margin {margin}");
            }
        }
        assert!(free > 0);
        m.validate().unwrap();
    }

    #[test]
    fn deterministic_bytes() {
        let (rows, labels) = random_problem(30, 4, 3);
        let cfg = SvmConfig::default();
        assert_eq!(train(&rows, &labels, &cfg).to_json(), train(&rows, &labels, &cfg).to_json());
    }

    #[test]
    fn batch_matches_single() {
        let (rows, labels) = random_problem(25, 2, 11);
        let m = train(&rows, &labels, &SvmConfig::default());
        let batch = m.decision_values(&rows).unwrap();
        for (r, b) in rows.iter().zip(batch) {
            assert_eq!(m.decision_value(r).unwrap(), b);
        }
    }

    #[test]
    fn calibrated_probability_increases_with_score() {
        let (rows, labels) = random_problem(40, 2, 5);
        let m = train(&rows, &labels, &SvmConfig::default());
        let p = m.calibration.unwrap();
        assert!(p.a < 0.0);
        assert!(p.probability(1.0) > p.probability(-1.0));
    }

    #[test]
    fn single_class_rejected() {
        let rows = vec![vec![0.0], vec![1.0]];
        let r = train_rows(&rows, vec![1], &[Label::Pos, Label::Pos], &SvmConfig::default());
        assert!(matches!(r, Err(SvmError::SingleClass)));
    }

    #[test]
    fn nan_rejected() {
        let rows = vec![vec![f64::NAN], vec![1.0]];
        let r = train_rows(&rows, vec![1], &[Label::Pos, Label::Neg], &SvmConfig::default());
        assert!(matches!(r, Err(SvmError::InvalidInput(_))));
    }

    #[test]
    fn json_roundtrip_and_schema_errors() {
        let (rows, labels) = random_problem(20, 3, 1);
        let m = train(&rows, &labels, &SvmConfig::default());
        let doc = m.to_json();
        let back = SvmModel::<f64>::from_json(&doc).unwrap();
        assert_eq!(back, m);

        let truncated = &doc[..doc.len() / 2];
        assert!(matches!(SvmModel::<f64>::from_json(truncated), Err(SvmError::SchemaViolation(_))));

        let bumped = doc.replacen("\"version\": 1", "\"version\": 7", 1);
        match SvmModel::<f64>::from_json(&bumped) {
            Err(SvmError::SchemaViolation(msg)) => assert!(msg.contains("expected 1") && msg.contains("found 7"), "{msg}"),
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn single_precision_training() {
        let rows: Vec<Vec<f32>> = vec![vec![-1.0, 0.2], vec![-0.8, -0.1], vec![1.0, 0.0], vec![0.9, 0.3]];
        let ids = vec![1, 2];
        let labels = [Label::Neg, Label::Neg, Label::Pos, Label::Pos];
        let m = train_rows(&rows, ids, &labels, &SvmConfig::default()).unwrap();
        for (r, l) in rows.iter().zip(labels) {
            assert_eq!(m.predict(r).unwrap(), l);
        }
    }
}

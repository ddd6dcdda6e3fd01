use std::collections::HashMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ParcellationError;
use crate::Scalar;

/// Regional SUVR values of one scan, ordered by region id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub scan_id: String,
    pub region_ids: Vec<u32>,
    pub values: Vec<T>,
}

/// Rows are scans, columns are regions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    region_ids: Vec<u32>,
    scan_ids: Vec<String>,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(region_ids: Vec<u32>, scan_ids: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self, ParcellationError> {
        if scan_ids.len() != rows.len() {
            return Err(ParcellationError::InvalidFeatures(format!(
                "{} scan ids for {} rows",
                scan_ids.len(),
                rows.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != region_ids.len()) {
            return Err(ParcellationError::InvalidFeatures(format!(
                "row {} (`{}`) has {} values, expected {}",
                i,
                scan_ids[i],
                r.len(),
                region_ids.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = scan_ids.iter().find(|s| !seen.insert(s.as_str())) {
            return Err(ParcellationError::InvalidFeatures(format!("duplicate scan id `{dup}`")));
        }
        Ok(Self { region_ids, scan_ids, rows })
    }

    /// Stacks feature vectors that share one region ordering.
    pub fn from_vectors(vectors: Vec<FeatureVector<T>>) -> Result<Self, ParcellationError> {
        let region_ids = vectors.first().map(|v| v.region_ids.clone()).unwrap_or_default();
        if let Some(v) = vectors.iter().find(|v| v.region_ids != region_ids) {
            return Err(ParcellationError::InvalidFeatures(format!(
                "scan `{}` has a different region ordering",
                v.scan_id
            )));
        }
        let (scan_ids, rows) = vectors.into_iter().map(|v| (v.scan_id, v.values)).unzip();
        Self::new(region_ids, scan_ids, rows)
    }

    pub fn region_ids(&self) -> &[u32] {
        &self.region_ids
    }

    pub fn scan_ids(&self) -> &[String] {
        &self.scan_ids
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.region_ids.len()
    }

    pub fn index_of(&self, scan_id: &str) -> Option<usize> {
        self.scan_ids.iter().position(|s| s == scan_id)
    }

    pub fn scan_index(&self) -> HashMap<&str, usize> {
        self.scan_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }

    pub fn vector(&self, i: usize) -> FeatureVector<T> {
        FeatureVector {
            scan_id: self.scan_ids[i].clone(),
            region_ids: self.region_ids.clone(),
            values: self.rows[i].clone(),
        }
    }

    /// Sub-matrix with the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            region_ids: self.region_ids.clone(),
            scan_ids: indices.iter().map(|&i| self.scan_ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// `scan_id` followed by one column per region id.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("scan_id");
        for id in &self.region_ids {
            out.push_str(&format!(",{id}"));
        }
        out.push('\n');
        for (sid, row) in self.scan_ids.iter().zip(&self.rows) {
            out.push_str(sid);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, ParcellationError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: io::Read>(reader: R) -> Result<Self, ParcellationError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("scan_id") {
            return Err(ParcellationError::InvalidFeatures("first column must be `scan_id`".into()));
        }
        let region_ids = headers
            .iter()
            .skip(1)
            .map(|h| {
                h.parse::<u32>()
                    .map_err(|_| ParcellationError::InvalidFeatures(format!("bad region column `{h}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut scan_ids = Vec::new();
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            scan_ids.push(record[0].to_string());
            let row = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .and_then(T::from_f64)
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| ParcellationError::InvalidFeatures(format!("bad value `{v}` for `{}`", &record[0])))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(region_ids, scan_ids, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = FeatureMatrix::<f64>::new(
            vec![3, 7],
            vec!["a".into(), "b".into()],
            vec![vec![1.0 / 3.0, 2.5], vec![1e-17, 1.8]],
        )
        .unwrap();
        let text = m.to_csv_string();
        assert!(text.starts_with("scan_id,3,7\n"));
        assert_eq!(FeatureMatrix::<f64>::from_reader(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn rejects_ragged_and_duplicate_rows() {
        assert!(FeatureMatrix::<f64>::new(vec![1, 2], vec!["a".into()], vec![vec![1.0]]).is_err());
        assert!(FeatureMatrix::<f64>::new(vec![1], vec!["a".into(), "a".into()], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(FeatureMatrix::<f64>::from_reader("scan_id,1\na,nan\n".as_bytes()).is_err());
    }
}

//! Two-reader cohort labels, consensus, and inter-reader agreement.

use std::collections::HashSet;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parcellation::FeatureMatrix;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum CohortError {
    #[error("cohort has no records")]
    EmptyCohort,
    #[error("expected agreement is 1; kappa is undefined")]
    DegenerateMarginals,
    #[error("duplicate scan id `{0}`")]
    DuplicateScan(String),
    #[error("no feature row for scan `{0}`")]
    MissingFeatures(String),
    #[error("discordant scan `{0}` has no adjudicated label")]
    MissingAdjudication(String),
    #[error("labels file row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Binary amyloid status. `Pos` is the positive class for every metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pos" => Some(Label::Pos),
            "neg" => Some(Label::Neg),
            _ => None,
        }
    }

    /// +1 for `Pos`, -1 for `Neg`.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Pos => T::one(),
            Label::Neg => -T::one(),
        }
    }

    /// Classification rule for a decision value; zero maps to `Pos`.
    pub fn from_decision<T: Scalar>(f: T) -> Self {
        if f >= T::zero() {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Pos => "pos",
            Label::Neg => "neg",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Consensus {
    Pos,
    Neg,
    Discordant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub scan_id: String,
    pub reader1: Label,
    pub reader2: Label,
    /// Tie-breaking label for discordant reads, when one was supplied.
    pub adjudicated: Option<Label>,
}

impl ScanRecord {
    pub fn new(scan_id: impl Into<String>, reader1: Label, reader2: Label) -> Self {
        Self { scan_id: scan_id.into(), reader1, reader2, adjudicated: None }
    }

    pub fn consensus(&self) -> Consensus {
        match (self.reader1, self.reader2) {
            (Label::Pos, Label::Pos) => Consensus::Pos,
            (Label::Neg, Label::Neg) => Consensus::Neg,
            _ => Consensus::Discordant,
        }
    }

    pub fn concordant_label(&self) -> Option<Label> {
        (self.reader1 == self.reader2).then_some(self.reader1)
    }
}

/// Which scans enter training, and with what label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetPolicy {
    /// Only scans both readers agree on.
    #[default]
    ConcordantOnly,
    /// Every scan; discordant ones take their adjudicated label.
    Adjudicated,
}

/// 2x2 reader contingency counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Contingency {
    pub pos_pos: usize,
    pub neg_neg: usize,
    /// reader1 Pos, reader2 Neg
    pub pos_neg: usize,
    /// reader1 Neg, reader2 Pos
    pub neg_pos: usize,
}

impl Contingency {
    pub fn total(&self) -> usize {
        self.pos_pos + self.neg_neg + self.pos_neg + self.neg_pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement<T> {
    pub table: Contingency,
    pub observed: T,
    pub expected: T,
    pub kappa: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cohort {
    records: Vec<ScanRecord>,
}

impl Cohort {
    pub fn new(records: Vec<ScanRecord>) -> Result<Self, CohortError> {
        let mut seen = HashSet::new();
        if let Some(r) = records.iter().find(|r| !seen.insert(r.scan_id.as_str())) {
            return Err(CohortError::DuplicateScan(r.scan_id.clone()));
        }
        Ok(Self { records })
    }

    /// Builds a cohort from a contingency table, with generated scan ids.
    pub fn from_contingency(table: Contingency) -> Self {
        let cells = [
            (table.pos_pos, Label::Pos, Label::Pos),
            (table.neg_neg, Label::Neg, Label::Neg),
            (table.pos_neg, Label::Pos, Label::Neg),
            (table.neg_pos, Label::Neg, Label::Pos),
        ];
        let records = cells
            .iter()
            .flat_map(|&(n, a, b)| std::iter::repeat_n((a, b), n))
            .enumerate()
            .map(|(i, (a, b))| ScanRecord::new(format!("scan_{:04}", i + 1), a, b))
            .collect();
        Self { records }
    }

    /// Reads `scan_id,reader1,reader2[,adjudicated]` (labels `pos`/`neg`, any case).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, CohortError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: io::Read>(reader: R) -> Result<Self, CohortError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let missing = |name: &str| CohortError::BadRow { row: 0, message: format!("missing column `{name}`") };
        let id_col = find("scan_id").ok_or_else(|| missing("scan_id"))?;
        let r1_col = find("reader1").ok_or_else(|| missing("reader1"))?;
        let r2_col = find("reader2").ok_or_else(|| missing("reader2"))?;
        let adj_col = find("adjudicated");

        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 1;
            let label = |col: usize| -> Result<Label, CohortError> {
                let v = rec.get(col).unwrap_or("");
                Label::parse(v).ok_or_else(|| CohortError::BadRow { row, message: format!("bad label `{v}`") })
            };
            let adjudicated = match adj_col.and_then(|c| rec.get(c)).map(str::trim) {
                None | Some("") => None,
                Some(_) => Some(label(adj_col.expect("column present"))?),
            };
            records.push(ScanRecord {
                scan_id: rec.get(id_col).unwrap_or("").to_string(),
                reader1: label(r1_col)?,
                reader2: label(r2_col)?,
                adjudicated,
            });
        }
        Self::new(records)
    }

    pub fn to_csv_string(&self) -> String {
        let with_adj = self.records.iter().any(|r| r.adjudicated.is_some());
        let mut out = String::from(if with_adj { "scan_id,reader1,reader2,adjudicated\n" } else { "scan_id,reader1,reader2\n" });
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.scan_id, r.reader1, r.reader2));
            if with_adj {
                out.push(',');
                if let Some(a) = r.adjudicated {
                    out.push_str(a.as_str());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn records(&self) -> &[ScanRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contingency(&self) -> Contingency {
        let mut t = Contingency::default();
        for r in &self.records {
            match (r.reader1, r.reader2) {
                (Label::Pos, Label::Pos) => t.pos_pos += 1,
                (Label::Neg, Label::Neg) => t.neg_neg += 1,
                (Label::Pos, Label::Neg) => t.pos_neg += 1,
                (Label::Neg, Label::Pos) => t.neg_pos += 1,
            }
        }
        t
    }

    /// Fraction of scans the two readers label identically.
    pub fn agreement_rate<T: Scalar>(&self) -> Result<T, CohortError> {
        let t = self.contingency();
        if t.total() == 0 {
            return Err(CohortError::EmptyCohort);
        }
        Ok(T::count(t.pos_pos + t.neg_neg) / T::count(t.total()))
    }

    /// Unweighted Cohen's kappa for the two binary readers.
    pub fn cohens_kappa<T: Scalar>(&self) -> Result<T, CohortError> {
        self.agreement().map(|a| a.kappa)
    }

    pub fn agreement<T: Scalar>(&self) -> Result<Agreement<T>, CohortError> {
        let t = self.contingency();
        let n = t.total();
        if n == 0 {
            return Err(CohortError::EmptyCohort);
        }
        let r1_pos = t.pos_pos + t.pos_neg;
        let r2_pos = t.pos_pos + t.neg_pos;
        let chance = r1_pos * r2_pos + (n - r1_pos) * (n - r2_pos);
        if chance == n * n {
            return Err(CohortError::DegenerateMarginals);
        }
        let nf = T::count(n);
        let observed = T::count(t.pos_pos + t.neg_neg) / nf;
        let expected = T::count(chance) / (nf * nf);
        let kappa = (observed - expected) / (T::one() - expected);
        Ok(Agreement { table: t, observed, expected, kappa })
    }

    /// Concordant scans only.
    pub fn consensus_subset(&self) -> Cohort {
        Cohort { records: self.records.iter().filter(|r| r.reader1 == r.reader2).cloned().collect() }
    }

    /// `(scan_id, training label)` under the given policy, in record order.
    pub fn training_labels(&self, policy: SubsetPolicy) -> Result<Vec<(&str, Label)>, CohortError> {
        let mut out = Vec::with_capacity(self.records.len());
        for r in &self.records {
            match (r.concordant_label(), policy) {
                (Some(l), _) => out.push((r.scan_id.as_str(), l)),
                (None, SubsetPolicy::ConcordantOnly) => {}
                (None, SubsetPolicy::Adjudicated) => {
                    let l = r.adjudicated.ok_or_else(|| CohortError::MissingAdjudication(r.scan_id.clone()))?;
                    out.push((r.scan_id.as_str(), l));
                }
            }
        }
        Ok(out)
    }

    /// Joins training labels with feature rows by scan id.
    pub fn dataset<T: Scalar>(&self, features: &FeatureMatrix<T>, policy: SubsetPolicy) -> Result<Dataset<T>, CohortError> {
        let index = features.scan_index();
        let labelled = self.training_labels(policy)?;
        let mut rows = Vec::with_capacity(labelled.len());
        let mut labels = Vec::with_capacity(labelled.len());
        for (sid, l) in labelled {
            let &i = index.get(sid).ok_or_else(|| CohortError::MissingFeatures(sid.to_string()))?;
            rows.push(i);
            labels.push(l);
        }
        Ok(Dataset { features: features.select(&rows), labels })
    }
}

/// Feature rows paired with training labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub features: FeatureMatrix<T>,
    pub labels: Vec<Label>,
}

impl<T: Scalar> Dataset<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Pos).count();
        (pos, self.labels.len() - pos)
    }
}

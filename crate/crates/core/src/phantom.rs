//! Synthetic cohorts with known ground truth.
//!
//! Every scan sits on the atlas grid. Cerebellar voxels carry `baseline`,
//! signal regions carry `baseline * suvr_pos` or `baseline * suvr_neg`
//! depending on the true label, the remaining labelled regions carry
//! `baseline * suvr_neg * 0.9`, and background is 0. Voxel noise is
//! multiplicative, `v * (1 + sigma * N(0, 1))`. Two simulated readers each
//! flip the true label independently with `reader_flip_prob`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohort::{Cohort, CohortError, ScanRecord};
use crate::fsutil::write_atomic;
use crate::parcellation::{AtlasParcellation, RegionTable};
use crate::volume::{write_nifti, write_nifti_with, Intent, Volume3D, VolumeError, WriteOptions};
use crate::{Label, Scalar};

/// Name prefixes of the default signal regions; the first table entry matching each is used.
pub const DEFAULT_SIGNAL_KEYWORDS: [&str; 8] = [
    "Frontal_Inf",
    "Cuneus",
    "Olfactory",
    "Postcentral",
    "SupraMarginal",
    "Temporal_Pole",
    "Thalamus",
    "Pallidum",
];

const LABEL_STREAM: u64 = u64::MAX;
const READER_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Error)]
pub enum PhantomError {
    #[error("invalid phantom spec: {0}")]
    BadSpec(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error(transparent)]
    Cohort(#[from] CohortError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec<T> {
    pub n_scans: usize,
    pub pos_fraction: T,
    /// Empty selects the default keyword regions from the atlas table.
    pub signal_regions: Vec<u32>,
    pub suvr_pos: T,
    pub suvr_neg: T,
    pub baseline: T,
    pub noise_sigma: T,
    pub reader_flip_prob: T,
    pub seed: u64,
}

impl<T: Scalar> Default for PhantomSpec<T> {
    fn default() -> Self {
        Self {
            n_scans: 150,
            pos_fraction: T::lit(0.6),
            signal_regions: Vec::new(),
            suvr_pos: T::lit(1.8),
            suvr_neg: T::lit(1.1),
            baseline: T::one(),
            noise_sigma: T::lit(0.15),
            reader_flip_prob: T::lit(0.04),
            seed: 0,
        }
    }
}

impl<T: Scalar> PhantomSpec<T> {
    /// Signal region ids, resolving the keyword defaults against `table` when none are given.
    pub fn resolve_signal_regions(&self, table: &RegionTable) -> Result<Vec<u32>, PhantomError> {
        if !self.signal_regions.is_empty() {
            return Ok(self.signal_regions.clone());
        }
        DEFAULT_SIGNAL_KEYWORDS
            .iter()
            .map(|kw| {
                table
                    .iter()
                    .find(|r| !r.is_cerebellar && r.name.starts_with(kw))
                    .map(|r| r.id)
                    .ok_or_else(|| PhantomError::BadSpec(format!("no atlas region named like `{kw}`")))
            })
            .collect()
    }

    /// Checks the spec against `table` and returns the resolved signal regions.
    pub fn validate(&self, table: &RegionTable) -> Result<Vec<u32>, PhantomError> {
        let bad = |m: String| Err(PhantomError::BadSpec(m));
        if self.n_scans == 0 {
            return bad("n_scans must be positive".into());
        }
        if !(self.pos_fraction > T::zero() && self.pos_fraction < T::one()) {
            return bad(format!("pos_fraction must lie in (0, 1), got {}", self.pos_fraction));
        }
        if !(self.suvr_neg > T::zero()) || !(self.suvr_pos > self.suvr_neg) || !self.suvr_pos.is_finite() {
            return bad(format!("need 0 < suvr_neg < suvr_pos, got {} and {}", self.suvr_neg, self.suvr_pos));
        }
        if !(self.baseline > T::zero()) || !self.baseline.is_finite() {
            return bad(format!("baseline must be positive, got {}", self.baseline));
        }
        if !(self.noise_sigma >= T::zero()) || !self.noise_sigma.is_finite() {
            return bad(format!("noise_sigma must be non-negative, got {}", self.noise_sigma));
        }
        if !(self.reader_flip_prob >= T::zero() && self.reader_flip_prob < T::lit(0.5)) {
            return bad(format!("reader_flip_prob must lie in [0, 0.5), got {}", self.reader_flip_prob));
        }
        let regions = self.resolve_signal_regions(table)?;
        let mut seen = BTreeSet::new();
        for &id in &regions {
            match table.get(id) {
                None => return bad(format!("signal region {id} is not in the atlas")),
                Some(r) if r.is_cerebellar => return bad(format!("signal region {id} is cerebellar")),
                _ => {}
            }
            if !seen.insert(id) {
                return bad(format!("signal region {id} listed twice"));
            }
        }
        Ok(regions)
    }

    pub fn n_pos(&self) -> usize {
        (self.pos_fraction * T::count(self.n_scans)).round().to_usize().unwrap_or(0).clamp(1, self.n_scans.max(2) - 1)
    }
}

/// Scan id for index `i` (0-based).
pub fn phantom_scan_id(i: usize) -> String {
    format!("phantom_{:04}", i + 1)
}

/// True labels: `n_pos` positives placed by a seeded shuffle.
pub fn true_labels<T: Scalar>(spec: &PhantomSpec<T>) -> Vec<Label> {
    let mut labels = vec![Label::Neg; spec.n_scans];
    labels[..spec.n_pos().min(spec.n_scans)].fill(Label::Pos);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(LABEL_STREAM);
    labels.shuffle(&mut rng);
    labels
}

/// Two independent readers, each flipping the true label with probability `flip_prob`.
pub fn simulate_readers(truth: &[Label], flip_prob: f64, seed: u64) -> Vec<(Label, Label)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(READER_STREAM);
    truth
        .iter()
        .map(|&t| {
            let mut read = || if rng.random::<f64>() < flip_prob { t.flipped() } else { t };
            let r1 = read();
            let r2 = read();
            (r1, r2)
        })
        .collect()
}

/// Noise-free voxel value of each atlas label for a scan of class `label`.
fn label_values<T: Scalar>(spec: &PhantomSpec<T>, atlas: &AtlasParcellation<T>, signal: &[u32], label: Label) -> Vec<(u32, T)> {
    let suvr = match label {
        Label::Pos => spec.suvr_pos,
        Label::Neg => spec.suvr_neg,
    };
    atlas
        .table()
        .iter()
        .map(|r| {
            let v = if r.is_cerebellar {
                spec.baseline
            } else if signal.contains(&r.id) {
                spec.baseline * suvr
            } else {
                spec.baseline * spec.suvr_neg * T::lit(0.9)
            };
            (r.id, v)
        })
        .collect()
}

/// Uptake volume of scan `index` with class `label`; `signal` as returned by [`PhantomSpec::validate`].
pub fn generate_scan<T: Scalar>(
    spec: &PhantomSpec<T>,
    atlas: &AtlasParcellation<T>,
    signal: &[u32],
    index: usize,
    label: Label,
) -> Result<Volume3D<T>, PhantomError> {
    let values = label_values(spec, atlas, signal, label);
    let lookup = |l: u32| values.iter().find(|(id, _)| *id == l).map(|&(_, v)| v).unwrap_or_else(T::zero);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let data = atlas
        .labels()
        .iter()
        .map(|&l| {
            if l == 0 {
                return T::zero();
            }
            let e: f64 = StandardNormal.sample(&mut rng);
            lookup(l) * (T::one() + spec.noise_sigma * T::lit(e))
        })
        .collect();
    Ok(atlas.label_volume().with_data(data, Intent::Uptake)?)
}

/// Where a generated cohort landed on disk.
#[derive(Debug, Clone)]
pub struct PhantomCohort {
    pub cohort: Cohort,
    pub truth: Vec<(String, Label)>,
    pub signal_regions: Vec<u32>,
    pub scans_dir: PathBuf,
    pub labels_path: PathBuf,
    pub truth_path: PathBuf,
    pub atlas_path: PathBuf,
    pub regions_path: PathBuf,
}

#[derive(Serialize)]
struct SpecEcho<'a, T> {
    #[serde(flatten)]
    spec: &'a PhantomSpec<T>,
    resolved_signal_regions: &'a [u32],
    scan_ids: (String, String),
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<&'a serde_json::Value>,
}

/// Free-text stamps carried into the generated files.
#[derive(Debug, Clone, Default)]
pub struct PhantomStamp {
    /// NIfTI `descrip` for every scan; defaults to `phantom seed N`.
    pub description: Option<String>,
    /// Embedded in `spec.json` under `provenance`.
    pub provenance: Option<serde_json::Value>,
}

/// Writes `scans/*.nii.gz`, `labels.csv`, `truth.csv`, `spec.json`, plus the
/// atlas (`atlas.nii.gz`, `regions.csv`) so the tree is self-contained.
pub fn generate_cohort<T: Scalar>(
    spec: &PhantomSpec<T>,
    atlas: &AtlasParcellation<T>,
    out_dir: impl AsRef<Path>,
) -> Result<PhantomCohort, PhantomError> {
    generate_cohort_with(spec, atlas, out_dir, &PhantomStamp::default())
}

pub fn generate_cohort_with<T: Scalar>(
    spec: &PhantomSpec<T>,
    atlas: &AtlasParcellation<T>,
    out_dir: impl AsRef<Path>,
    stamp: &PhantomStamp,
) -> Result<PhantomCohort, PhantomError> {
    let signal = spec.validate(atlas.table())?;
    let out = out_dir.as_ref();
    let scans_dir = out.join("scans");
    fs::create_dir_all(&scans_dir)?;

    let truth = true_labels(spec);
    (0..spec.n_scans).into_par_iter().try_for_each(|i| -> Result<(), PhantomError> {
        let vol = generate_scan(spec, atlas, &signal, i, truth[i])?;
        let description = stamp.description.clone().unwrap_or_else(|| format!("phantom seed {}", spec.seed));
        let opts = WriteOptions { description, ..Default::default() };
        write_nifti_with(&vol, scans_dir.join(format!("{}.nii.gz", phantom_scan_id(i))), &opts)?;
        Ok(())
    })?;

    let reads = simulate_readers(&truth, spec.reader_flip_prob.to_f64_lossy(), spec.seed);
    let records = reads.iter().enumerate().map(|(i, &(a, b))| ScanRecord::new(phantom_scan_id(i), a, b)).collect();
    let cohort = Cohort::new(records)?;
    let labels_path = out.join("labels.csv");
    write_atomic(&labels_path, cohort.to_csv_string().as_bytes())?;

    let truth_pairs: Vec<(String, Label)> = truth.iter().enumerate().map(|(i, &l)| (phantom_scan_id(i), l)).collect();
    let mut truth_csv = String::from("scan_id,true_label\n");
    for (id, l) in &truth_pairs {
        truth_csv.push_str(&format!("{id},{l}\n"));
    }
    let truth_path = out.join("truth.csv");
    write_atomic(&truth_path, truth_csv.as_bytes())?;

    let echo = SpecEcho {
        spec,
        resolved_signal_regions: &signal,
        scan_ids: (phantom_scan_id(0), phantom_scan_id(spec.n_scans - 1)),
        provenance: stamp.provenance.as_ref(),
    };
    let mut json = serde_json::to_string_pretty(&echo).expect("spec serializes");
    json.push('\n');
    write_atomic(&out.join("spec.json"), json.as_bytes())?;

    let atlas_path = out.join("atlas.nii.gz");
    write_nifti(atlas.label_volume(), &atlas_path)?;
    let regions_path = out.join("regions.csv");
    write_atomic(&regions_path, atlas.table().to_csv_string().as_bytes())?;

    Ok(PhantomCohort { cohort, truth: truth_pairs, signal_regions: signal, scans_dir, labels_path, truth_path, atlas_path, regions_path })
}

/// Reads a `scan_id,true_label` file.
pub fn read_truth_csv(path: impl AsRef<Path>) -> Result<Vec<(String, Label)>, PhantomError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_io)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_io)?;
        let id = rec.get(0).unwrap_or("").to_string();
        let l = rec
            .get(1)
            .and_then(Label::parse)
            .ok_or_else(|| PhantomError::BadSpec(format!("truth row {}: bad label", i + 1)))?;
        out.push((id, l));
    }
    Ok(out)
}

fn csv_io(e: csv::Error) -> PhantomError {
    PhantomError::Io(std::io::Error::other(e))
}

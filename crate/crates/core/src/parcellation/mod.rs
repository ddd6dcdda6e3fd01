//! Atlas parcellation and cerebellum-normalized regional SUVR features.
//!
//! A scan must already sit on the atlas voxel grid; nothing here resamples.
//! Each feature is the mean uptake of one non-cerebellar region divided by
//! the voxel-pooled mean over every cerebellar voxel.

mod aal;
mod features;
mod test_atlas;

pub use aal::aal1_region_table;
pub use features::{FeatureMatrix, FeatureVector};
pub use test_atlas::{test_atlas, test_label_volume, test_region_table, TEST_ATLAS_DIM};

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{Intent, Volume3D};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum ParcellationError {
    #[error("voxel label {0} is not in the region table")]
    UnknownLabel(u32),
    #[error("region {0} has no usable voxels")]
    EmptyRegion(u32),
    #[error("scan grid {scan:?} does not match atlas grid {atlas:?}")]
    DimensionMismatch { scan: [usize; 3], atlas: [usize; 3] },
    #[error("cerebellar reference mean is {0}; it must be positive")]
    ZeroReference(f64),
    #[error("expected a {expected:?} volume, got {found:?}")]
    WrongIntent { expected: Intent, found: Intent },
    #[error("invalid region table: {0}")]
    InvalidTable(String),
    #[error("invalid feature matrix: {0}")]
    InvalidFeatures(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub id: u32,
    pub name: String,
    pub is_cerebellar: bool,
}

/// Region definitions, kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionTable {
    entries: Vec<Region>,
}

impl RegionTable {
    pub fn new(mut entries: Vec<Region>) -> Result<Self, ParcellationError> {
        entries.sort_by_key(|r| r.id);
        if let Some(w) = entries.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ParcellationError::InvalidTable(format!("duplicate region id {}", w[0].id)));
        }
        if entries.iter().any(|r| r.id == 0) {
            return Err(ParcellationError::InvalidTable("region id 0 is reserved for background".into()));
        }
        if !entries.iter().any(|r| r.is_cerebellar) {
            return Err(ParcellationError::InvalidTable("no cerebellar region".into()));
        }
        if entries.iter().all(|r| r.is_cerebellar) {
            return Err(ParcellationError::InvalidTable("no non-cerebellar region".into()));
        }
        Ok(Self { entries })
    }

    /// Reads a `region_id,name,is_cerebellar` CSV.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, ParcellationError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: io::Read>(reader: R) -> Result<Self, ParcellationError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| ParcellationError::InvalidTable(format!("missing column `{name}`")))
        };
        let (id_col, name_col, cb_col) = (col("region_id")?, col("name")?, col("is_cerebellar")?);
        let mut entries = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("");
            let id = field(id_col).parse::<u32>().map_err(|_| {
                ParcellationError::InvalidTable(format!("row {}: bad region_id `{}`", line + 1, field(id_col)))
            })?;
            let is_cerebellar = parse_flag(field(cb_col)).ok_or_else(|| {
                ParcellationError::InvalidTable(format!("row {}: bad is_cerebellar `{}`", line + 1, field(cb_col)))
            })?;
            entries.push(Region { id, name: field(name_col).to_string(), is_cerebellar });
        }
        Self::new(entries)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("region_id,name,is_cerebellar\n");
        for r in &self.entries {
            out.push_str(&format!("{},{},{}\n", r.id, r.name, r.is_cerebellar));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &Region> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Region> {
        self.entries.binary_search_by_key(&id, |r| r.id).ok().map(|i| &self.entries[i])
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.get(id).map(|r| r.name.as_str())
    }

    /// Ids of the non-cerebellar regions, ascending; these are the feature columns.
    pub fn feature_region_ids(&self) -> Vec<u32> {
        self.entries.iter().filter(|r| !r.is_cerebellar).map(|r| r.id).collect()
    }

    pub fn cerebellar_ids(&self) -> Vec<u32> {
        self.entries.iter().filter(|r| r.is_cerebellar).map(|r| r.id).collect()
    }
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// A label volume checked against its region table.
#[derive(Debug, Clone)]
pub struct AtlasParcellation<T> {
    grid: Volume3D<T>,
    labels: Vec<u32>,
    table: RegionTable,
    voxel_counts: BTreeMap<u32, usize>,
}

impl<T: Scalar> AtlasParcellation<T> {
    pub fn load(label_volume: Volume3D<T>, table: RegionTable) -> Result<Self, ParcellationError> {
        if label_volume.intent() != Intent::Labels {
            return Err(ParcellationError::WrongIntent {
                expected: Intent::Labels,
                found: label_volume.intent(),
            });
        }
        let labels: Vec<u32> = label_volume
            .data()
            .iter()
            .map(|v| v.to_u32().expect("label intent guarantees non-negative integers"))
            .collect();
        let mut voxel_counts: BTreeMap<u32, usize> = table.iter().map(|r| (r.id, 0)).collect();
        for &l in labels.iter().filter(|&&l| l != 0) {
            match voxel_counts.get_mut(&l) {
                Some(c) => *c += 1,
                None => return Err(ParcellationError::UnknownLabel(l)),
            }
        }
        if let Some((&id, _)) = voxel_counts.iter().find(|(_, &c)| c == 0) {
            return Err(ParcellationError::EmptyRegion(id));
        }
        Ok(Self { grid: label_volume, labels, table, voxel_counts })
    }

    pub fn table(&self) -> &RegionTable {
        &self.table
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_volume(&self) -> &Volume3D<T> {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims()
    }

    pub fn voxel_count(&self, region: u32) -> usize {
        self.voxel_counts.get(&region).copied().unwrap_or(0)
    }

    pub fn feature_region_ids(&self) -> Vec<u32> {
        self.table.feature_region_ids()
    }
}

/// Per-region uptake sums over the usable (finite, non-negative) voxels.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMeans<T> {
    pub means: BTreeMap<u32, T>,
    pub sums: BTreeMap<u32, T>,
    pub counts: BTreeMap<u32, usize>,
    /// Labeled voxels skipped because they were NaN, infinite or negative.
    pub excluded_voxels: usize,
}

/// Mean scan value per atlas region; background (label 0) is ignored.
pub fn region_means<T: Scalar>(
    scan: &Volume3D<T>,
    atlas: &AtlasParcellation<T>,
) -> Result<RegionMeans<T>, ParcellationError> {
    if scan.intent() != Intent::Uptake {
        return Err(ParcellationError::WrongIntent { expected: Intent::Uptake, found: scan.intent() });
    }
    if scan.dims() != atlas.dims() {
        return Err(ParcellationError::DimensionMismatch { scan: scan.dims(), atlas: atlas.dims() });
    }
    let mut sums: BTreeMap<u32, T> = atlas.voxel_counts.keys().map(|&id| (id, T::zero())).collect();
    let mut counts: BTreeMap<u32, usize> = atlas.voxel_counts.keys().map(|&id| (id, 0)).collect();
    let mut excluded = 0;
    for (&label, &v) in atlas.labels.iter().zip(scan.data()) {
        if label == 0 {
            continue;
        }
        if !v.is_finite() || v < T::zero() {
            excluded += 1;
            continue;
        }
        *sums.get_mut(&label).expect("atlas labels validated at load") += v;
        *counts.get_mut(&label).expect("atlas labels validated at load") += 1;
    }
    let mut means = BTreeMap::new();
    for (&id, &n) in &counts {
        if n == 0 {
            return Err(ParcellationError::EmptyRegion(id));
        }
        means.insert(id, sums[&id] / T::count(n));
    }
    Ok(RegionMeans { means, sums, counts, excluded_voxels: excluded })
}

/// Features of one scan along with the quantities they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureExtraction<T> {
    pub features: FeatureVector<T>,
    /// Pooled cerebellar mean used as the SUVR denominator.
    pub reference: T,
    pub excluded_voxels: usize,
}

pub fn extract_features<T: Scalar>(
    scan_id: &str,
    scan: &Volume3D<T>,
    atlas: &AtlasParcellation<T>,
) -> Result<FeatureVector<T>, ParcellationError> {
    extract_features_report(scan_id, scan, atlas).map(|r| r.features)
}

pub fn extract_features_report<T: Scalar>(
    scan_id: &str,
    scan: &Volume3D<T>,
    atlas: &AtlasParcellation<T>,
) -> Result<FeatureExtraction<T>, ParcellationError> {
    let stats = region_means(scan, atlas)?;
    let cerebellar: BTreeSet<u32> = atlas.table.cerebellar_ids().into_iter().collect();
    let (sum, n) = cerebellar.iter().fold((T::zero(), 0usize), |(s, n), id| {
        (s + stats.sums[id], n + stats.counts[id])
    });
    if n == 0 {
        return Err(ParcellationError::ZeroReference(0.0));
    }
    let reference = sum / T::count(n);
    if !(reference > T::zero()) {
        return Err(ParcellationError::ZeroReference(reference.to_f64_lossy()));
    }
    if stats.excluded_voxels > 0 {
        log::warn!("{scan_id}: {} voxels excluded (NaN or negative uptake)", stats.excluded_voxels);
    }
    let region_ids = atlas.table.feature_region_ids();
    let values = region_ids.iter().map(|id| stats.means[id] / reference).collect();
    Ok(FeatureExtraction {
        features: FeatureVector { scan_id: scan_id.to_string(), region_ids, values },
        reference,
        excluded_voxels: stats.excluded_voxels,
    })
}

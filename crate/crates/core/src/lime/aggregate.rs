use std::collections::{BTreeMap, BTreeSet};
use std::io;

use serde::Serialize;

use super::{Explanation, LimeError};
use crate::parcellation::{AtlasParcellation, RegionTable};
use crate::volume::{Intent, Volume3D};
use crate::{Label, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRegion<T> {
    pub region_id: u32,
    /// Mean signed weight over the class's instances, 0 where unselected.
    pub mean_weight: T,
    /// Fraction of the class's instances whose top-k includes the region.
    pub frequency: T,
}

/// Cohort-level region weights for one predicted class, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateExplanation<T> {
    pub class: Label,
    pub n_instances: usize,
    pub regions: Vec<AggregateRegion<T>>,
}

impl<T: Scalar> AggregateExplanation<T> {
    pub fn ranked_region_ids(&self) -> Vec<u32> {
        self.regions.iter().map(|r| r.region_id).collect()
    }

    pub fn weight(&self, region_id: u32) -> Option<T> {
        self.regions.iter().find(|r| r.region_id == region_id).map(|r| r.mean_weight)
    }
}

fn rank<T: Scalar>(regions: &mut [AggregateRegion<T>]) {
    regions.sort_by(|a, b| {
        b.mean_weight
            .abs()
            .partial_cmp(&a.mean_weight.abs())
            .expect("finite weights")
            .then(a.region_id.cmp(&b.region_id))
    });
}

/// Aggregates the explanations whose predicted class is `class`.
///
/// Every region appearing in any of `explanations` is reported, so both
/// classes list the same regions.
pub fn aggregate_explanations<T: Scalar>(
    explanations: &[Explanation<T>],
    predicted: &[Label],
    class: Label,
) -> Result<AggregateExplanation<T>, LimeError> {
    if explanations.len() != predicted.len() {
        return Err(LimeError::LengthMismatch { expected: explanations.len(), found: predicted.len() });
    }
    let all: BTreeSet<u32> = explanations.iter().flat_map(|e| e.region_weights.iter().map(|r| r.0)).collect();
    let members: Vec<&Explanation<T>> =
        explanations.iter().zip(predicted).filter(|(_, &p)| p == class).map(|(e, _)| e).collect();
    if members.is_empty() {
        return Err(LimeError::EmptyClass(class));
    }
    let mut sums: BTreeMap<u32, (T, usize)> = all.iter().map(|&id| (id, (T::zero(), 0))).collect();
    for e in &members {
        for &(id, w) in &e.region_weights {
            let s = sums.get_mut(&id).expect("collected above");
            s.0 += w;
            s.1 += 1;
        }
    }
    let n = T::count(members.len());
    let mut regions: Vec<AggregateRegion<T>> = sums
        .into_iter()
        .map(|(region_id, (sum, hits))| AggregateRegion { region_id, mean_weight: sum / n, frequency: T::count(hits) / n })
        .collect();
    rank(&mut regions);
    Ok(AggregateExplanation { class, n_instances: members.len(), regions })
}

/// One aggregate per class that has at least one explanation, `Pos` first.
pub fn aggregate_by_class<T: Scalar>(explanations: &[Explanation<T>]) -> Vec<AggregateExplanation<T>> {
    let predicted: Vec<Label> = explanations.iter().map(|e| e.predicted_class).collect();
    [Label::Pos, Label::Neg]
        .into_iter()
        .filter_map(|c| aggregate_explanations(explanations, &predicted, c).ok())
        .collect()
}

/// Paints each region's mean weight onto its voxels; cerebellar and background voxels stay 0.
pub fn project_weights<T: Scalar>(agg: &AggregateExplanation<T>, atlas: &AtlasParcellation<T>) -> Result<Volume3D<T>, LimeError> {
    let mut weight_of: BTreeMap<u32, T> = BTreeMap::new();
    for r in &agg.regions {
        let region = atlas.table().get(r.region_id).ok_or(LimeError::UnknownRegion(r.region_id))?;
        if !region.is_cerebellar {
            weight_of.insert(r.region_id, r.mean_weight);
        }
    }
    let data = atlas.labels().iter().map(|l| weight_of.get(l).copied().unwrap_or_else(T::zero)).collect();
    Ok(atlas.label_volume().with_data(data, Intent::Weights)?)
}

fn region_name(table: &RegionTable, id: u32) -> &str {
    table.name(id).unwrap_or("")
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

/// `scan_id,predicted_class,region_id,region_name,weight,rank,r2`, rank starting at 1.
pub fn instances_csv<T: Scalar>(explanations: &[Explanation<T>], table: &RegionTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scan_id", "predicted_class", "region_id", "region_name", "weight", "rank", "r2"]).unwrap();
    for e in explanations {
        for (rank, &(id, weight)) in e.region_weights.iter().enumerate() {
            w.write_record([
                e.scan_id.clone(),
                e.predicted_class.to_string(),
                id.to_string(),
                region_name(table, id).to_string(),
                weight.to_string(),
                (rank + 1).to_string(),
                e.local_fidelity_r2.to_string(),
            ])
            .unwrap();
        }
    }
    finish(w)
}

/// `class,region_id,region_name,mean_weight,frequency`, in rank order per class.
pub fn aggregate_csv<T: Scalar>(aggregates: &[AggregateExplanation<T>], table: &RegionTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["class", "region_id", "region_name", "mean_weight", "frequency"]).unwrap();
    for a in aggregates {
        for r in &a.regions {
            w.write_record([
                a.class.to_string(),
                r.region_id.to_string(),
                region_name(table, r.region_id).to_string(),
                r.mean_weight.to_string(),
                r.frequency.to_string(),
            ])
            .unwrap();
        }
    }
    finish(w)
}

/// Reads an aggregate CSV back, keeping row order within each class.
pub fn read_aggregate_csv<T: Scalar, R: io::Read>(reader: R) -> Result<Vec<AggregateExplanation<T>>, LimeError> {
    let bad = |m: String| LimeError::BadAggregate(m);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column `{name}`")));
    let (c_class, c_id, c_w, c_f) = (col("class")?, col("region_id")?, col("mean_weight")?, col("frequency")?);
    let mut out: Vec<AggregateExplanation<T>> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let at = |c: usize| rec.get(c).unwrap_or("");
        let class = Label::parse(at(c_class)).ok_or_else(|| bad(format!("row {}: bad class `{}`", row + 1, at(c_class))))?;
        let region_id: u32 = at(c_id).parse().map_err(|_| bad(format!("row {}: bad region_id", row + 1)))?;
        let num = |c: usize| -> Result<T, LimeError> {
            at(c)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(T::lit)
                .ok_or_else(|| bad(format!("row {}: bad number `{}`", row + 1, at(c))))
        };
        let region = AggregateRegion { region_id, mean_weight: num(c_w)?, frequency: num(c_f)? };
        match out.iter_mut().find(|a| a.class == class) {
            Some(a) => a.regions.push(region),
            None => out.push(AggregateExplanation { class, n_instances: 0, regions: vec![region] }),
        }
    }
    Ok(out)
}

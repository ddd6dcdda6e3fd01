//! AAL1 region table, indices 1..=116 as used by the `aal.nii` label volume.

use super::{Region, RegionTable};

const CEREBRAL: [&str; 45] = [
    "Precentral",
    "Frontal_Sup",
    "Frontal_Sup_Orb",
    "Frontal_Mid",
    "Frontal_Mid_Orb",
    "Frontal_Inf_Oper",
    "Frontal_Inf_Tri",
    "Frontal_Inf_Orb",
    "Rolandic_Oper",
    "Supp_Motor_Area",
    "Olfactory",
    "Frontal_Sup_Medial",
    "Frontal_Med_Orb",
    "Rectus",
    "Insula",
    "Cingulum_Ant",
    "Cingulum_Mid",
    "Cingulum_Post",
    "Hippocampus",
    "ParaHippocampal",
    "Amygdala",
    "Calcarine",
    "Cuneus",
    "Lingual",
    "Occipital_Sup",
    "Occipital_Mid",
    "Occipital_Inf",
    "Fusiform",
    "Postcentral",
    "Parietal_Sup",
    "Parietal_Inf",
    "SupraMarginal",
    "Angular",
    "Precuneus",
    "Paracentral_Lobule",
    "Caudate",
    "Putamen",
    "Pallidum",
    "Thalamus",
    "Heschl",
    "Temporal_Sup",
    "Temporal_Pole_Sup",
    "Temporal_Mid",
    "Temporal_Pole_Mid",
    "Temporal_Inf",
];

const CEREBELLAR_PAIRED: [&str; 9] = [
    "Cerebelum_Crus1",
    "Cerebelum_Crus2",
    "Cerebelum_3",
    "Cerebelum_4_5",
    "Cerebelum_6",
    "Cerebelum_7b",
    "Cerebelum_8",
    "Cerebelum_9",
    "Cerebelum_10",
];

const VERMIS: [&str; 8] = [
    "Vermis_1_2",
    "Vermis_3",
    "Vermis_4_5",
    "Vermis_6",
    "Vermis_7",
    "Vermis_8",
    "Vermis_9",
    "Vermis_10",
];

/// The 116-region AAL1 table: 90 cerebral regions (1..=90) and 26
/// cerebellar/vermis regions (91..=116) flagged as reference.
pub fn aal1_region_table() -> RegionTable {
    let mut entries = Vec::with_capacity(116);
    let mut push = |name: String, is_cerebellar: bool| {
        let id = entries.len() as u32 + 1;
        entries.push(Region { id, name, is_cerebellar });
    };
    for base in CEREBRAL.iter().chain(CEREBELLAR_PAIRED.iter()) {
        let cerebellar = base.starts_with("Cerebelum");
        push(format!("{base}_L"), cerebellar);
        push(format!("{base}_R"), cerebellar);
    }
    for name in VERMIS {
        push(name.to_string(), true);
    }
    RegionTable::new(entries).expect("bundled table is valid")
}

//! Small synthetic atlas for tests and phantom runs: a 16x16x16 grid with a
//! spherical "brain", ten cortical sectors and two cerebellar regions.

use std::f64::consts::PI;

use super::{AtlasParcellation, Region, RegionTable};
use crate::volume::{Intent, Volume3D};
use crate::Scalar;

pub const TEST_ATLAS_DIM: usize = 16;

const NAMES: [&str; 12] = [
    "Frontal_Inf_Oper",
    "Cuneus",
    "Olfactory",
    "Postcentral",
    "SupraMarginal",
    "Temporal_Pole_Sup",
    "Thalamus",
    "Pallidum",
    "Precuneus",
    "Occipital_Mid",
    "Cerebelum_Crus1",
    "Vermis_4_5",
];

pub fn test_region_table() -> RegionTable {
    let entries = NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| Region { id: i as u32 + 1, name: name.to_string(), is_cerebellar: i >= 10 })
        .collect();
    RegionTable::new(entries).expect("bundled table is valid")
}

/// Label volume of the test atlas (2 mm isotropic).
pub fn test_label_volume<T: Scalar>() -> Volume3D<T> {
    let n = TEST_ATLAS_DIM;
    let c = (n as f64 - 1.0) / 2.0;
    let radius = n as f64 / 2.0 - 0.5;
    let mut data = Vec::with_capacity(n * n * n);
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let (dx, dy, dz) = (x as f64 - c, y as f64 - c, z as f64 - c);
                let label = if dx * dx + dy * dy + dz * dz > radius * radius {
                    0
                } else if z < 4 {
                    if dx.abs() < 2.0 { 12 } else { 11 }
                } else {
                    let angle = dy.atan2(dx) + PI;
                    1 + ((angle / (2.0 * PI) * 10.0).floor() as u32).min(9)
                };
                data.push(T::count(label as usize));
            }
        }
    }
    Volume3D::from_data([n; 3], [T::lit(2.0); 3], data, Intent::Labels).expect("valid geometry")
}

pub fn test_atlas<T: Scalar>() -> AtlasParcellation<T> {
    AtlasParcellation::load(test_label_volume(), test_region_table()).expect("test atlas is consistent")
}

//! Single-file NIfTI-1 (`.nii` / `.nii.gz`) reader and writer.
//!
//! Reads either byte order and any of the plain integer or real datatypes;
//! always writes little-endian with a 352-byte data offset.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{Intent, Volume3D, VolumeError};
use crate::Scalar;

pub const NIFTI_INTENT_ESTIMATE: i16 = 1001;
pub const NIFTI_INTENT_LABEL: i16 = 1002;

const HEADER_SIZE: usize = 348;
const DATA_OFFSET: usize = 352;
const MAGIC: &[u8; 4] = b"n+1\0";
const XFORM_ALIGNED_ANAT: i16 = 2;
const UNITS_MM: u8 = 2;

/// NIfTI-1 header byte offsets.
mod off {
    pub const SIZEOF_HDR: usize = 0;
    pub const REGULAR: usize = 38;
    pub const DIM: usize = 40;
    pub const INTENT_CODE: usize = 68;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const DESCRIP: usize = 148;
    pub const QFORM_CODE: usize = 252;
    pub const SFORM_CODE: usize = 254;
    pub const QUATERN_B: usize = 256;
    pub const QOFFSET_X: usize = 268;
    pub const SROW_X: usize = 280;
    pub const MAGIC: usize = 344;
}

/// On-disk voxel type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageType {
    UInt8,
    Int8,
    Int16,
    UInt16,
    Int32,
    UInt32,
    Int64,
    UInt64,
    Float32,
    Float64,
}

impl StorageType {
    pub const ALL: [StorageType; 10] = [
        StorageType::UInt8,
        StorageType::Int8,
        StorageType::Int16,
        StorageType::UInt16,
        StorageType::Int32,
        StorageType::UInt32,
        StorageType::Int64,
        StorageType::UInt64,
        StorageType::Float32,
        StorageType::Float64,
    ];

    pub fn code(self) -> i16 {
        match self {
            StorageType::UInt8 => 2,
            StorageType::Int16 => 4,
            StorageType::Int32 => 8,
            StorageType::Float32 => 16,
            StorageType::Float64 => 64,
            StorageType::Int8 => 256,
            StorageType::UInt16 => 512,
            StorageType::UInt32 => 768,
            StorageType::Int64 => 1024,
            StorageType::UInt64 => 1280,
        }
    }

    pub fn from_code(code: i16) -> Result<Self, VolumeError> {
        Self::ALL
            .into_iter()
            .find(|t| t.code() == code)
            .ok_or(VolumeError::UnsupportedDatatype(code))
    }

    pub fn size(self) -> usize {
        match self {
            StorageType::UInt8 | StorageType::Int8 => 1,
            StorageType::Int16 | StorageType::UInt16 => 2,
            StorageType::Int32 | StorageType::UInt32 | StorageType::Float32 => 4,
            StorageType::Int64 | StorageType::UInt64 | StorageType::Float64 => 8,
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, StorageType::Float32 | StorageType::Float64)
    }

    fn integer_range(self) -> (f64, f64) {
        match self {
            StorageType::UInt8 => (0.0, u8::MAX as f64),
            StorageType::Int8 => (i8::MIN as f64, i8::MAX as f64),
            StorageType::Int16 => (i16::MIN as f64, i16::MAX as f64),
            StorageType::UInt16 => (0.0, u16::MAX as f64),
            StorageType::Int32 => (i32::MIN as f64, i32::MAX as f64),
            StorageType::UInt32 => (0.0, u32::MAX as f64),
            // Limited to the f64-exact integer range.
            StorageType::Int64 => (-9_007_199_254_740_992.0, 9_007_199_254_740_992.0),
            StorageType::UInt64 => (0.0, 9_007_199_254_740_992.0),
            StorageType::Float32 | StorageType::Float64 => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Storage used by [`write_nifti`] for a volume of the given intent.
    pub fn default_for(intent: Intent) -> Self {
        match intent {
            Intent::Labels => StorageType::Int16,
            Intent::Uptake | Intent::Weights => StorageType::Float32,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct WriteOptions {
    /// Voxel type; defaults to int16 for labels and float32 otherwise.
    pub storage: Option<StorageType>,
    /// Gzip the output; defaults to whether the path ends in `.gz`.
    pub compress: Option<bool>,
    /// Free text for the 80-byte `descrip` field (truncated to 79 bytes).
    pub description: String,
    /// Writes `(scl_slope, scl_inter)` into the header and stores the voxel
    /// values unchanged, i.e. the volume holds raw stored values.
    pub raw_scaling: Option<(f32, f32)>,
}

pub fn read_nifti<T: Scalar>(path: impl AsRef<Path>) -> Result<Volume3D<T>, VolumeError> {
    let bytes = fs::read(path)?;
    decode_nifti(&bytes)
}

pub fn write_nifti<T: Scalar>(vol: &Volume3D<T>, path: impl AsRef<Path>) -> Result<(), VolumeError> {
    write_nifti_with(vol, path, &WriteOptions::default())
}

pub fn write_nifti_with<T: Scalar>(
    vol: &Volume3D<T>,
    path: impl AsRef<Path>,
    opts: &WriteOptions,
) -> Result<(), VolumeError> {
    let path = path.as_ref();
    let raw = encode_nifti(vol, opts)?;
    let compress = opts
        .compress
        .unwrap_or_else(|| path.extension().is_some_and(|e| e == "gz"));
    let bytes = if compress { gzip(&raw)? } else { raw };
    crate::fsutil::write_atomic(path, &bytes)?;
    Ok(())
}

/// Decodes an in-memory file; gzip is detected from the leading magic bytes.
pub fn decode_nifti<T: Scalar>(bytes: &[u8]) -> Result<Volume3D<T>, VolumeError> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(bytes).read_to_end(&mut out)?;
        return decode_raw(&out);
    }
    decode_raw(bytes)
}

/// Encodes an uncompressed little-endian single-file image.
pub fn encode_nifti<T: Scalar>(vol: &Volume3D<T>, opts: &WriteOptions) -> Result<Vec<u8>, VolumeError> {
    encode_with::<LittleEndian, T>(vol, opts)
}

fn gzip(raw: &[u8]) -> Result<Vec<u8>, VolumeError> {
    // GzEncoder leaves mtime at 0, so output is reproducible.
    let mut enc = GzEncoder::new(Vec::with_capacity(raw.len() / 2), Compression::default());
    enc.write_all(raw)?;
    Ok(enc.finish()?)
}

fn decode_raw<T: Scalar>(bytes: &[u8]) -> Result<Volume3D<T>, VolumeError> {
    if bytes.len() < 4 {
        return Err(VolumeError::TruncatedFile { expected: HEADER_SIZE, found: bytes.len() });
    }
    if LittleEndian::read_i32(&bytes[..4]) == HEADER_SIZE as i32 {
        parse::<LittleEndian, T>(bytes)
    } else if BigEndian::read_i32(&bytes[..4]) == HEADER_SIZE as i32 {
        parse::<BigEndian, T>(bytes)
    } else {
        Err(VolumeError::BadMagic(format!(
            "sizeof_hdr is {} (expected {HEADER_SIZE})",
            LittleEndian::read_i32(&bytes[..4])
        )))
    }
}

fn read_f32s<B: ByteOrder, const N: usize>(bytes: &[u8], at: usize) -> [f32; N] {
    std::array::from_fn(|i| B::read_f32(&bytes[at + 4 * i..]))
}

fn parse<B: ByteOrder, T: Scalar>(bytes: &[u8]) -> Result<Volume3D<T>, VolumeError> {
    if bytes.len() < HEADER_SIZE {
        return Err(VolumeError::TruncatedFile { expected: HEADER_SIZE, found: bytes.len() });
    }
    if &bytes[off::MAGIC..off::MAGIC + 4] != MAGIC {
        return Err(VolumeError::BadMagic(format!(
            "magic is {:?}",
            String::from_utf8_lossy(&bytes[off::MAGIC..off::MAGIC + 4])
        )));
    }

    let dim: [i16; 8] = std::array::from_fn(|i| B::read_i16(&bytes[off::DIM + 2 * i..]));
    match dim[0] {
        3 => {}
        4 if dim[4] == 1 => {}
        4 => {
            return Err(VolumeError::DimensionMismatch(format!(
                "4-D volume with {} frames",
                dim[4]
            )))
        }
        n => return Err(VolumeError::DimensionMismatch(format!("dim[0] = {n}"))),
    }
    if dim[1..4].iter().any(|&d| d < 1) {
        return Err(VolumeError::InvalidHeader(format!("non-positive extent in {:?}", &dim[1..4])));
    }
    let dims = [dim[1] as usize, dim[2] as usize, dim[3] as usize];

    let storage = StorageType::from_code(B::read_i16(&bytes[off::DATATYPE..]))?;
    let pixdim: [f32; 8] = read_f32s::<B, 8>(bytes, off::PIXDIM);
    let spacing_f32 = [pixdim[1].abs(), pixdim[2].abs(), pixdim[3].abs()];
    if spacing_f32.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(VolumeError::InvalidHeader(format!("voxel spacing {spacing_f32:?}")));
    }

    let vox_offset = B::read_f32(&bytes[off::VOX_OFFSET..]);
    if !(vox_offset >= DATA_OFFSET as f32) || vox_offset.fract() != 0.0 {
        return Err(VolumeError::InvalidHeader(format!("vox_offset {vox_offset}")));
    }
    let start = vox_offset as usize;
    let n = dims[0] * dims[1] * dims[2];
    let end = start + n * storage.size();
    if bytes.len() < end {
        return Err(VolumeError::TruncatedFile { expected: end, found: bytes.len() });
    }

    let slope = B::read_f32(&bytes[off::SCL_SLOPE..]);
    let inter = B::read_f32(&bytes[off::SCL_INTER..]);
    let scaling = (slope != 0.0 && slope.is_finite() && !(slope == 1.0 && inter == 0.0))
        .then_some((slope as f64, if inter.is_finite() { inter as f64 } else { 0.0 }));

    let payload = &bytes[start..end];
    let data: Vec<T> = (0..n)
        .map(|i| {
            let raw = read_stored::<B>(storage, &payload[i * storage.size()..]);
            let v = match scaling {
                Some((s, b)) => raw * s + b,
                None => raw,
            };
            T::from(v).unwrap_or_else(T::nan)
        })
        .collect();

    let spacing = spacing_f32.map(|s| T::lit(s as f64));
    let affine = header_affine::<B, T>(bytes, &pixdim);
    let intent = match B::read_i16(&bytes[off::INTENT_CODE..]) {
        NIFTI_INTENT_LABEL => Intent::Labels,
        NIFTI_INTENT_ESTIMATE => Intent::Weights,
        _ => Intent::Uptake,
    };
    Volume3D::new(dims, spacing, affine, data, intent)
}

fn read_stored<B: ByteOrder>(storage: StorageType, b: &[u8]) -> f64 {
    match storage {
        StorageType::UInt8 => b[0] as f64,
        StorageType::Int8 => b[0] as i8 as f64,
        StorageType::Int16 => B::read_i16(b) as f64,
        StorageType::UInt16 => B::read_u16(b) as f64,
        StorageType::Int32 => B::read_i32(b) as f64,
        StorageType::UInt32 => B::read_u32(b) as f64,
        StorageType::Int64 => B::read_i64(b) as f64,
        StorageType::UInt64 => B::read_u64(b) as f64,
        StorageType::Float32 => B::read_f32(b) as f64,
        StorageType::Float64 => B::read_f64(b),
    }
}

/// Voxel-to-world transform: sform when present, else qform, else scaling only.
fn header_affine<B: ByteOrder, T: Scalar>(bytes: &[u8], pixdim: &[f32; 8]) -> [[T; 4]; 4] {
    let sform_code = B::read_i16(&bytes[off::SFORM_CODE..]);
    let qform_code = B::read_i16(&bytes[off::QFORM_CODE..]);
    let mut m = [[0.0f64; 4]; 4];
    m[3][3] = 1.0;
    if sform_code > 0 {
        for (r, row) in m.iter_mut().take(3).enumerate() {
            let srow: [f32; 4] = read_f32s::<B, 4>(bytes, off::SROW_X + 16 * r);
            *row = srow.map(|v| v as f64);
        }
    } else if qform_code > 0 {
        let [b, c, d]: [f32; 3] = read_f32s::<B, 3>(bytes, off::QUATERN_B);
        let (b, c, d) = (b as f64, c as f64, d as f64);
        let a = (1.0 - (b * b + c * c + d * d)).max(0.0).sqrt();
        let rot = [
            [a * a + b * b - c * c - d * d, 2.0 * (b * c - a * d), 2.0 * (b * d + a * c)],
            [2.0 * (b * c + a * d), a * a + c * c - b * b - d * d, 2.0 * (c * d - a * b)],
            [2.0 * (b * d - a * c), 2.0 * (c * d + a * b), a * a + d * d - c * c - b * b],
        ];
        let qfac = if pixdim[0] < 0.0 { -1.0 } else { 1.0 };
        let scale = [pixdim[1].abs() as f64, pixdim[2].abs() as f64, qfac * pixdim[3].abs() as f64];
        let offset: [f32; 3] = read_f32s::<B, 3>(bytes, off::QOFFSET_X);
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = rot[r][c] * scale[c];
            }
            m[r][3] = offset[r] as f64;
        }
    } else {
        for i in 0..3 {
            m[i][i] = pixdim[i + 1].abs() as f64;
        }
    }
    m.map(|row| row.map(T::lit))
}

pub(crate) fn encode_with<B: ByteOrder, T: Scalar>(
    vol: &Volume3D<T>,
    opts: &WriteOptions,
) -> Result<Vec<u8>, VolumeError> {
    let storage = opts.storage.unwrap_or(StorageType::default_for(vol.intent()));
    let dims = vol.dims();
    if dims.iter().any(|&d| d > i16::MAX as usize) {
        return Err(VolumeError::InvalidVolume(format!("dims {dims:?} exceed NIfTI-1 limits")));
    }

    let mut buf = vec![0u8; DATA_OFFSET + vol.len() * storage.size()];
    let h = &mut buf[..DATA_OFFSET];
    B::write_i32(&mut h[off::SIZEOF_HDR..], HEADER_SIZE as i32);
    h[off::REGULAR] = b'r';
    let dim = [3, dims[0] as i16, dims[1] as i16, dims[2] as i16, 1, 1, 1, 1];
    for (i, d) in dim.iter().enumerate() {
        B::write_i16(&mut h[off::DIM + 2 * i..], *d);
    }
    let intent_code = match vol.intent() {
        Intent::Labels => NIFTI_INTENT_LABEL,
        Intent::Weights => NIFTI_INTENT_ESTIMATE,
        Intent::Uptake => 0,
    };
    B::write_i16(&mut h[off::INTENT_CODE..], intent_code);
    B::write_i16(&mut h[off::DATATYPE..], storage.code());
    B::write_i16(&mut h[off::BITPIX..], (storage.size() * 8) as i16);
    let sp = vol.spacing();
    let pixdim = [1.0, f32_of(sp[0]), f32_of(sp[1]), f32_of(sp[2]), 1.0, 1.0, 1.0, 1.0];
    for (i, p) in pixdim.iter().enumerate() {
        B::write_f32(&mut h[off::PIXDIM + 4 * i..], *p);
    }
    B::write_f32(&mut h[off::VOX_OFFSET..], DATA_OFFSET as f32);
    let (slope, inter) = opts.raw_scaling.unwrap_or((1.0, 0.0));
    B::write_f32(&mut h[off::SCL_SLOPE..], slope);
    B::write_f32(&mut h[off::SCL_INTER..], inter);
    h[off::XYZT_UNITS] = UNITS_MM;
    let descrip = opts.description.as_bytes();
    let len = descrip.len().min(79);
    h[off::DESCRIP..off::DESCRIP + len].copy_from_slice(&descrip[..len]);
    B::write_i16(&mut h[off::SFORM_CODE..], XFORM_ALIGNED_ANAT);
    let affine = vol.affine();
    for r in 0..3 {
        for c in 0..4 {
            B::write_f32(&mut h[off::SROW_X + 16 * r + 4 * c..], f32_of(affine[r][c]));
        }
    }
    h[off::MAGIC..off::MAGIC + 4].copy_from_slice(MAGIC);

    let (lo, hi) = storage.integer_range();
    let payload = &mut buf[DATA_OFFSET..];
    for (i, &v) in vol.data().iter().enumerate() {
        let x = v.to_f64_lossy();
        if storage.is_integer() && (x.fract() != 0.0 || !(lo..=hi).contains(&x)) {
            return Err(VolumeError::InvalidVolume(format!(
                "value {x} at voxel {i} does not fit {storage:?}"
            )));
        }
        let out = &mut payload[i * storage.size()..];
        match storage {
            StorageType::UInt8 => out[0] = x as u8,
            StorageType::Int8 => out[0] = x as i8 as u8,
            StorageType::Int16 => B::write_i16(out, x as i16),
            StorageType::UInt16 => B::write_u16(out, x as u16),
            StorageType::Int32 => B::write_i32(out, x as i32),
            StorageType::UInt32 => B::write_u32(out, x as u32),
            StorageType::Int64 => B::write_i64(out, x as i64),
            StorageType::UInt64 => B::write_u64(out, x as u64),
            StorageType::Float32 => B::write_f32(out, f32_of(v)),
            StorageType::Float64 => B::write_f64(out, x),
        }
    }
    Ok(buf)
}

fn f32_of<T: Scalar>(v: T) -> f32 {
    v.to_f32().unwrap_or(f32::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::diagonal_affine;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_volume(seed: u64, dims: [usize; 3]) -> Volume3D<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = dims.iter().product();
        let data = (0..n).map(|_| rng.random_range(-10.0f32..10.0)).collect();
        Volume3D::from_data(dims, [2.0, 2.0, 2.5], data, Intent::Uptake).unwrap()
    }

    fn labels(values: Vec<f64>) -> Volume3D<f64> {
        let n = values.len();
        Volume3D::from_data([n, 1, 1], [1.0; 3], values, Intent::Labels).unwrap()
    }

    #[test]
    fn wrong_sizeof_hdr_is_bad_magic() {
        let mut bytes = encode_nifti(&random_volume(1, [2, 2, 2]), &WriteOptions::default()).unwrap();
        LittleEndian::write_i32(&mut bytes[0..4], 349);
        assert!(matches!(decode_nifti::<f32>(&bytes), Err(VolumeError::BadMagic(_))));
    }

    #[test]
    fn two_file_magic_is_rejected() {
        let mut bytes = encode_nifti(&random_volume(1, [2, 2, 2]), &WriteOptions::default()).unwrap();
        bytes[off::MAGIC..off::MAGIC + 4].copy_from_slice(b"ni1\0");
        assert!(matches!(decode_nifti::<f32>(&bytes), Err(VolumeError::BadMagic(_))));
    }

    #[test]
    fn float_roundtrip_is_identical() {
        let v = random_volume(7, [4, 4, 4]);
        let back: Volume3D<f32> = decode_nifti(&encode_nifti(&v, &WriteOptions::default()).unwrap()).unwrap();
        assert_eq!(back.dims(), v.dims());
        assert_eq!(back.spacing(), v.spacing());
        assert_eq!(back.affine(), v.affine());
        let same = back.data().iter().zip(v.data()).all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn int16_scaling_is_applied() {
        let raw = Volume3D::<f64>::from_data([1, 1, 1], [1.0; 3], vec![4.0], Intent::Uptake).unwrap();
        let opts = WriteOptions {
            storage: Some(StorageType::Int16),
            raw_scaling: Some((0.5, 1.0)),
            ..Default::default()
        };
        let back: Volume3D<f64> = decode_nifti(&encode_nifti(&raw, &opts).unwrap()).unwrap();
        assert_eq!(back.data(), &[3.0]);
    }

    #[test]
    fn zero_slope_means_unscaled() {
        let raw = Volume3D::<f64>::from_data([2, 1, 1], [1.0; 3], vec![4.0, -2.0], Intent::Uptake).unwrap();
        let opts = WriteOptions {
            storage: Some(StorageType::Int16),
            raw_scaling: Some((0.0, 7.0)),
            ..Default::default()
        };
        let back: Volume3D<f64> = decode_nifti(&encode_nifti(&raw, &opts).unwrap()).unwrap();
        assert_eq!(back.data(), &[4.0, -2.0]);
    }

    #[test]
    fn labels_are_written_as_int16() {
        let v = labels(vec![0.0, 1.0, 116.0]);
        let bytes = encode_nifti(&v, &WriteOptions::default()).unwrap();
        assert_eq!(LittleEndian::read_i16(&bytes[off::DATATYPE..]), 4);
        assert_eq!(bytes.len(), DATA_OFFSET + 3 * 2);
        let back: Volume3D<f64> = decode_nifti(&bytes).unwrap();
        assert_eq!(back.intent(), Intent::Labels);
        assert_eq!(back.data(), &[0.0, 1.0, 116.0]);
    }

    #[test]
    fn zero_weights_roundtrip() {
        let v = Volume3D::<f64>::from_data([3, 2, 2], [1.0; 3], vec![0.0; 12], Intent::Weights).unwrap();
        let bytes = encode_nifti(&v, &WriteOptions::default()).unwrap();
        assert_eq!(LittleEndian::read_i16(&bytes[off::DATATYPE..]), 16);
        let back: Volume3D<f64> = decode_nifti(&bytes).unwrap();
        assert_eq!(back.intent(), Intent::Weights);
        assert!(back.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn oblique_affine_roundtrips() {
        let affine = [
            [-2.0, 0.25, 0.0, 90.0],
            [0.125, 2.0, -0.5, -126.0],
            [0.0, 0.5, 2.0, -72.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let v = Volume3D::<f64>::new([2, 2, 2], [2.0, 2.0, 2.0], affine, vec![1.0; 8], Intent::Uptake).unwrap();
        let back: Volume3D<f64> = decode_nifti(&encode_nifti(&v, &WriteOptions::default()).unwrap()).unwrap();
        assert_eq!(back.affine(), affine);
    }

    #[test]
    fn big_endian_files_are_read() {
        let v = random_volume(3, [3, 2, 2]);
        let opts = WriteOptions { storage: Some(StorageType::Float64), ..Default::default() };
        let be = encode_with::<BigEndian, f32>(&v, &opts).unwrap();
        assert_eq!(BigEndian::read_i32(&be[0..4]), 348);
        let back: Volume3D<f32> = decode_nifti(&be).unwrap();
        assert_eq!(back.data(), v.data());
        assert_eq!(back.affine(), v.affine());
    }

    #[test]
    fn every_storage_type_roundtrips() {
        for storage in StorageType::ALL {
            let values: Vec<f64> = if storage.is_integer() {
                let (lo, hi) = storage.integer_range();
                vec![lo.max(-100.0), 0.0, 1.0, hi.min(100.0), lo, hi.min(4_000_000_000.0)]
            } else {
                vec![-1.5, 0.0, 1.0e-3, 3.25, 1.0e6, -7.0]
            };
            let v = Volume3D::<f64>::from_data([6, 1, 1], [1.0; 3], values.clone(), Intent::Uptake).unwrap();
            let opts = WriteOptions { storage: Some(storage), ..Default::default() };
            let bytes = encode_nifti(&v, &opts).unwrap();
            let back: Volume3D<f64> = decode_nifti(&bytes).unwrap();
            let expected: Vec<f64> = match storage {
                StorageType::Float32 => values.iter().map(|&x| x as f32 as f64).collect(),
                _ => values,
            };
            assert_eq!(back.data(), expected.as_slice(), "{storage:?}");
        }
    }

    #[test]
    fn integer_storage_rejects_fractions() {
        let v = Volume3D::<f64>::from_data([1, 1, 1], [1.0; 3], vec![0.5], Intent::Uptake).unwrap();
        let opts = WriteOptions { storage: Some(StorageType::Int16), ..Default::default() };
        assert!(encode_nifti(&v, &opts).is_err());
    }

    #[test]
    fn gzip_detected_by_content() {
        let v = random_volume(5, [4, 3, 2]);
        let gz = gzip(&encode_nifti(&v, &WriteOptions::default()).unwrap()).unwrap();
        assert_eq!(&gz[..2], &[0x1f, 0x8b]);
        let back: Volume3D<f32> = decode_nifti(&gz).unwrap();
        assert_eq!(back.data(), v.data());
    }

    #[test]
    fn file_roundtrip_with_and_without_compression() {
        let dir = tempfile::tempdir().unwrap();
        let v = random_volume(9, [4, 4, 4]);
        for name in ["a.nii", "b.nii.gz"] {
            let p = dir.path().join(name);
            write_nifti(&v, &p).unwrap();
            let on_disk = fs::read(&p).unwrap();
            assert_eq!(on_disk.starts_with(&[0x1f, 0x8b]), name.ends_with(".gz"));
            let back: Volume3D<f32> = read_nifti(&p).unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn truncated_payload() {
        let bytes = encode_nifti(&random_volume(2, [4, 4, 4]), &WriteOptions::default()).unwrap();
        let cut = &bytes[..bytes.len() - 3];
        assert!(matches!(decode_nifti::<f32>(cut), Err(VolumeError::TruncatedFile { .. })));
        assert!(matches!(decode_nifti::<f32>(&bytes[..100]), Err(VolumeError::TruncatedFile { .. })));
        assert!(matches!(decode_nifti::<f32>(&bytes[..2]), Err(VolumeError::TruncatedFile { .. })));
    }

    #[test]
    fn dimension_rules() {
        let mut bytes = encode_nifti(&random_volume(2, [2, 2, 2]), &WriteOptions::default()).unwrap();
        LittleEndian::write_i16(&mut bytes[off::DIM..], 4);
        LittleEndian::write_i16(&mut bytes[off::DIM + 8..], 1);
        let squeezed: Volume3D<f32> = decode_nifti(&bytes).unwrap();
        assert_eq!(squeezed.dims(), [2, 2, 2]);

        LittleEndian::write_i16(&mut bytes[off::DIM + 8..], 2);
        assert!(matches!(decode_nifti::<f32>(&bytes), Err(VolumeError::DimensionMismatch(_))));

        LittleEndian::write_i16(&mut bytes[off::DIM..], 2);
        assert!(matches!(decode_nifti::<f32>(&bytes), Err(VolumeError::DimensionMismatch(_))));
    }

    #[test]
    fn unsupported_datatype() {
        let mut bytes = encode_nifti(&random_volume(2, [2, 2, 2]), &WriteOptions::default()).unwrap();
        LittleEndian::write_i16(&mut bytes[off::DATATYPE..], 128); // RGB24
        assert!(matches!(decode_nifti::<f32>(&bytes), Err(VolumeError::UnsupportedDatatype(128))));
    }

    #[test]
    fn qform_fallback() {
        let v = Volume3D::<f64>::from_data([2, 2, 2], [2.0, 3.0, 4.0], vec![0.0; 8], Intent::Uptake).unwrap();
        let mut bytes = encode_nifti(&v, &WriteOptions::default()).unwrap();
        LittleEndian::write_i16(&mut bytes[off::SFORM_CODE..], 0);
        // No qform either: scaling only.
        let back: Volume3D<f64> = decode_nifti(&bytes).unwrap();
        assert_eq!(back.affine(), diagonal_affine([2.0, 3.0, 4.0]));
        // Identity quaternion with an offset.
        LittleEndian::write_i16(&mut bytes[off::QFORM_CODE..], 1);
        for (i, o) in [10.0f32, -20.0, 30.0].iter().enumerate() {
            LittleEndian::write_f32(&mut bytes[off::QOFFSET_X + 4 * i..], *o);
        }
        let back: Volume3D<f64> = decode_nifti(&bytes).unwrap();
        let a = back.affine();
        assert_eq!([a[0][0], a[1][1], a[2][2]], [2.0, 3.0, 4.0]);
        assert_eq!([a[0][3], a[1][3], a[2][3]], [10.0, -20.0, 30.0]);
        // 180 degree turn about z: (b, c, d) = (0, 0, 1).
        LittleEndian::write_f32(&mut bytes[off::QUATERN_B + 8..], 1.0);
        let a = decode_nifti::<f64>(&bytes).unwrap().affine();
        assert_eq!([a[0][0], a[1][1], a[2][2]], [-2.0, -3.0, 4.0]);
    }

    proptest! {
        #[test]
        fn scaling_rule_holds(
            stored in proptest::collection::vec(-1000i16..1000, 1..20),
            slope in prop_oneof![-4.0f32..-0.01, 0.01f32..4.0],
            inter in -100.0f32..100.0,
        ) {
            let n = stored.len();
            let raw = Volume3D::<f64>::from_data(
                [n, 1, 1], [1.0; 3], stored.iter().map(|&s| s as f64).collect(), Intent::Uptake,
            ).unwrap();
            let opts = WriteOptions {
                storage: Some(StorageType::Int16),
                raw_scaling: Some((slope, inter)),
                ..Default::default()
            };
            let back: Volume3D<f64> = decode_nifti(&encode_nifti(&raw, &opts).unwrap()).unwrap();
            for (got, s) in back.data().iter().zip(&stored) {
                let want = *s as f64 * slope as f64 + inter as f64;
                prop_assert_eq!(*got, want);
            }
        }

        #[test]
        fn f32_payload_roundtrip(seed in any::<u64>(), nx in 1usize..6, ny in 1usize..6, nz in 1usize..6) {
            let v = random_volume(seed, [nx, ny, nz]);
            let back: Volume3D<f32> = decode_nifti(&encode_nifti(&v, &WriteOptions::default()).unwrap()).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}

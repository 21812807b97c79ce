//! The SUV1 volume container: a fixed 36-byte header followed by the raw
//! voxel payload.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `SUV1`                   |
//! | 4      | 2    | format version, currently 1    |
//! | 6      | 1    | volume kind                    |
//! | 7      | 4    | M (rows)                       |
//! | 11     | 4    | N (cols)                       |
//! | 15     | 4    | K (frames)                     |
//! | 19     | 1    | scale label (0 = custom)       |
//! | 20     | 16   | reserved, must be zero         |
//! | 36     | 4MNK | f32 voxels, frame- then row-major |
//!
//! Readers validate strictly and report the byte offset of whatever they
//! reject; writes are atomic (temp file + rename).

use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::{Volume, VolumeKind};

pub const MAGIC: &[u8; 4] = b"SUV1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 36;

const OFFSET_VERSION: u64 = 4;
const OFFSET_KIND: u64 = 6;
const OFFSET_DIMS: u64 = 7;
const OFFSET_SCALE: u64 = 19;
const OFFSET_RESERVED: u64 = 20;

/// A decoded volume file: the voxels plus the scale label they were
/// produced at (1-3 for the built-in presets, 0 for custom geometries).
#[derive(Debug, Clone, PartialEq)]
pub struct Suv1File {
    pub volume: Volume,
    pub scale_label: u8,
}

/// Serializes `volume` to `path`, atomically.
pub fn write_volume(path: &Path, volume: &Volume, scale_label: u8) -> Result<()> {
    let (h, w, d) = volume.dims();
    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * volume.voxel_count());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.push(volume.kind().as_u8());
    bytes.extend_from_slice(&(h as u32).to_le_bytes());
    bytes.extend_from_slice(&(w as u32).to_le_bytes());
    bytes.extend_from_slice(&(d as u32).to_le_bytes());
    bytes.push(scale_label);
    bytes.extend_from_slice(&[0u8; 16]);
    for &v in volume.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    super::atomic_write(path, &bytes)
}

fn format_err(offset: u64, reason: impl Into<String>) -> Error {
    Error::Format {
        offset,
        reason: reason.into(),
    }
}

/// Reads and strictly validates a SUV1 file.
pub fn read_volume(path: &Path) -> Result<Suv1File> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < HEADER_LEN {
        return Err(format_err(
            bytes.len() as u64,
            format!("file ends inside the {HEADER_LEN}-byte header"),
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(format_err(0, format!("bad magic {:?}", &bytes[0..4])));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format_err(
            OFFSET_VERSION,
            format!("unsupported version {version}, expected {VERSION}"),
        ));
    }
    let kind = VolumeKind::from_u8(bytes[6])
        .ok_or_else(|| format_err(OFFSET_KIND, format!("unknown volume kind {}", bytes[6])))?;

    let dim_at = |o: usize| u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]);
    let (h, w, d) = (dim_at(7) as u64, dim_at(11) as u64, dim_at(15) as u64);
    if h == 0 || w == 0 || d == 0 {
        return Err(format_err(OFFSET_DIMS, format!("zero dimension in {h}x{w}x{d}")));
    }

    let scale_label = bytes[19];
    if scale_label > 3 {
        return Err(format_err(
            OFFSET_SCALE,
            format!("scale label {scale_label} outside 0..=3"),
        ));
    }
    if bytes[20..36].iter().any(|&b| b != 0) {
        return Err(format_err(OFFSET_RESERVED, "reserved bytes must be zero"));
    }

    let voxels = h
        .checked_mul(w)
        .and_then(|x| x.checked_mul(d))
        .ok_or_else(|| format_err(OFFSET_DIMS, format!("dimension overflow {h}x{w}x{d}")))?;
    let expected = HEADER_LEN as u64 + 4 * voxels;
    if bytes.len() as u64 != expected {
        return Err(format_err(
            bytes.len().min(expected as usize) as u64,
            format!(
                "payload length mismatch: {h}x{w}x{d} needs {expected} bytes, file has {}",
                bytes.len()
            ),
        ));
    }

    let mut data = Vec::with_capacity(voxels as usize);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(format_err(
                (HEADER_LEN + 4 * i) as u64,
                format!("non-finite voxel value {v}"),
            ));
        }
        data.push(v);
    }
    let volume = Volume::new(kind, h as usize, w as usize, d as usize, data)?;
    Ok(Suv1File { volume, scale_label })
}

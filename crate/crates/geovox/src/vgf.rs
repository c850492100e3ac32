//! Grid file format (".vgf"): little-endian, magic "VGF1", 3x u32 dims,
//! 3x f32 spacing, 3x f32 origin, one dtype byte (0 = f32 scalar, 1 = u8
//! mask), then the payload in x-fastest order.
//!
//! Scalar payloads are stored as f32; writing a grid rounds each f64 value to
//! the nearest f32, so a file -> grid -> file round trip is bit-exact and a
//! grid -> file -> grid round trip is exact whenever the values are f32-
//! representable.

use std::fs;
use std::path::Path;

use geovox_core::grid::{BinaryMask, ScalarGrid};

use crate::error::{AppError, AppResult};

pub const MAGIC: [u8; 4] = *b"VGF1";
pub const DTYPE_SCALAR: u8 = 0;
pub const DTYPE_MASK: u8 = 1;

const HEADER_LEN: usize = 4 + 12 + 12 + 12 + 1;
const MAX_VOXELS: u64 = 1 << 33;

fn header(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], dtype: u8) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN);
    buf.extend_from_slice(&MAGIC);
    for d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for s in spacing {
        buf.extend_from_slice(&(s as f32).to_le_bytes());
    }
    for o in origin {
        buf.extend_from_slice(&(o as f32).to_le_bytes());
    }
    buf.push(dtype);
    buf
}

pub fn write_grid(grid: &ScalarGrid, path: &Path) -> AppResult<()> {
    let mut buf = header(grid.dims(), grid.spacing(), grid.origin(), DTYPE_SCALAR);
    buf.reserve(grid.values().len() * 4);
    for &v in grid.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| AppError::io(path, e))
}

pub fn write_mask(mask: &BinaryMask, path: &Path) -> AppResult<()> {
    let mut buf = header(mask.dims(), mask.spacing(), mask.origin(), DTYPE_MASK);
    buf.reserve(mask.occupancy().len());
    buf.extend(mask.occupancy().iter().map(|&b| b as u8));
    fs::write(path, buf).map_err(|e| AppError::io(path, e))
}

struct Parsed {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    dtype: u8,
    payload: Vec<u8>,
}

fn parse(path: &Path) -> AppResult<Parsed> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    if bytes.len() < HEADER_LEN {
        return Err(AppError::format(path, "truncated header"));
    }
    if bytes[..4] != MAGIC {
        return Err(AppError::format(path, "bad magic, expected VGF1"));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let dims_u32 = [u32_at(4), u32_at(8), u32_at(12)];
    let spacing = [
        f32_at(16) as f64,
        f32_at(20) as f64,
        f32_at(24) as f64,
    ];
    let origin = [
        f32_at(28) as f64,
        f32_at(32) as f64,
        f32_at(36) as f64,
    ];
    let dtype = bytes[40];
    let voxels_wide = dims_u32.iter().map(|&d| d as u128).product::<u128>();
    if voxels_wide == 0 || voxels_wide > MAX_VOXELS as u128 {
        return Err(AppError::format(
            path,
            format!("dims {:?} overflow the voxel budget", dims_u32),
        ));
    }
    let voxels = voxels_wide as u64;
    let elem = match dtype {
        DTYPE_SCALAR => 4,
        DTYPE_MASK => 1,
        other => {
            return Err(AppError::format(path, format!("unknown dtype tag {other}")));
        }
    };
    let expected = HEADER_LEN as u64 + voxels * elem;
    if bytes.len() as u64 != expected {
        return Err(AppError::format(
            path,
            format!(
                "payload length mismatch: file has {} bytes, header implies {expected}",
                bytes.len()
            ),
        ));
    }
    Ok(Parsed {
        dims: [dims_u32[0] as usize, dims_u32[1] as usize, dims_u32[2] as usize],
        spacing,
        origin,
        dtype,
        payload: bytes[HEADER_LEN..].to_vec(),
    })
}

pub fn read_grid(path: &Path) -> AppResult<ScalarGrid> {
    let p = parse(path)?;
    if p.dtype != DTYPE_SCALAR {
        return Err(AppError::format(path, "expected a scalar grid, found a mask"));
    }
    let values: Vec<f64> = p
        .payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    ScalarGrid::from_values(p.dims, p.spacing, p.origin, values)
        .map_err(|e| AppError::format(path, e.to_string()))
}

pub fn read_mask(path: &Path) -> AppResult<BinaryMask> {
    let p = parse(path)?;
    if p.dtype != DTYPE_MASK {
        return Err(AppError::format(path, "expected a mask, found a scalar grid"));
    }
    let occupancy: Vec<bool> = p.payload.iter().map(|&b| b != 0).collect();
    BinaryMask::from_occupancy(p.dims, p.spacing, p.origin, occupancy)
        .map_err(|e| AppError::format(path, e.to_string()))
}

//! `VSPD` binary snapshots of scalar fields.
//!
//! Layout, all little-endian:
//!
//! ```text
//! 0..4    magic "VSPD"
//! 4..6    version (u16) = 1
//! 6..8    N (u16)
//! 8..16   L (f64)
//! 16..    N*N f64 physical values, value (i1, i2) at 16 + 8 (i1 N + i2)
//! ```
//!
//! where `i1` indexes `x1 = i1 L / N`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, VortexError};
use crate::field::ScalarField;
use crate::grid::SpectralGrid;

pub const MAGIC: [u8; 4] = *b"VSPD";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encode(field: &ScalarField) -> Result<Vec<u8>> {
    let grid = field.grid();
    let n = u16::try_from(grid.n()).map_err(|_| VortexError::Snapshot(format!("N = {} does not fit in u16", grid.n())))?;
    let values = field.to_physical();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * values.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Decodes a snapshot; the field gets the default dealiasing fraction.
pub fn decode(bytes: &[u8]) -> Result<ScalarField> {
    if bytes.len() < HEADER_LEN {
        return Err(VortexError::Snapshot(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[0..4] != MAGIC {
        return Err(VortexError::Snapshot("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(VortexError::Snapshot(format!("unsupported version {version}")));
    }
    let n = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let length = f64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let grid = SpectralGrid::new(n, length)?;
    let expected = HEADER_LEN + 8 * grid.len();
    if bytes.len() != expected {
        return Err(VortexError::Snapshot(format!(
            "expected {expected} bytes for N = {n}, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField::from_physical(grid, &values)
}

pub fn write_to(mut w: impl Write, field: &ScalarField) -> Result<()> {
    w.write_all(&encode(field)?)
        .map_err(|e| VortexError::io("writing snapshot", e))
}

pub fn read_from(mut r: impl Read) -> Result<ScalarField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| VortexError::io("reading snapshot", e))?;
    decode(&bytes)
}

pub fn load(path: &Path) -> Result<ScalarField> {
    let bytes = fs::read(path).map_err(|e| VortexError::io(path.display().to_string(), e))?;
    decode(&bytes)
}

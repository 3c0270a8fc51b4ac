//! The LSF1 binary container for dense fields.
//!
//! Layout: magic `LSF1`, then `ni, nj, nk` as little-endian u32, one dtype
//! byte (0 = f64 field, 1 = u8 mask), then the raw values little-endian in
//! row-major k-fastest order. Masks use the same container with dtype 1 and
//! carry the `.lsm` extension by convention.

use std::io::{Read, Write};

use super::field::{BoolMask, Dims, ScalarField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LSF1";
const DTYPE_F64: u8 = 0;
const DTYPE_MASK: u8 = 1;

fn write_header(w: &mut impl Write, dims: Dims, dtype: u8) -> Result<()> {
    w.write_all(MAGIC)?;
    for n in [dims.0, dims.1, dims.2] {
        let n = u32::try_from(n)
            .map_err(|_| Error::Format(format!("dimension {n} exceeds u32 range")))?;
        w.write_all(&n.to_le_bytes())?;
    }
    w.write_all(&[dtype])?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<(Dims, u8)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected LSF1",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut buf = [0u8; 4];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        r.read_exact(&mut buf)?;
        *d = u32::from_le_bytes(buf) as usize;
    }
    let mut dtype = [0u8; 1];
    r.read_exact(&mut dtype)?;
    Ok(((dims[0], dims[1], dims[2]), dtype[0]))
}

/// Writes a scalar field (dtype 0).
pub fn write_field(w: &mut impl Write, f: &ScalarField) -> Result<()> {
    write_header(w, f.dims(), DTYPE_F64)?;
    for &v in f.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Writes a mask (dtype 1, one byte per voxel).
pub fn write_mask(w: &mut impl Write, m: &BoolMask) -> Result<()> {
    write_header(w, m.dims(), DTYPE_MASK)?;
    let bytes: Vec<u8> = m.data().iter().map(|&b| b as u8).collect();
    w.write_all(&bytes)?;
    Ok(())
}

/// Reads a scalar field; rejects mask-typed files.
pub fn read_field(r: &mut impl Read) -> Result<ScalarField> {
    let (dims, dtype) = read_header(r)?;
    if dtype != DTYPE_F64 {
        return Err(Error::Format(format!("expected dtype 0 (f64), got {dtype}")));
    }
    let len = dims.0 * dims.1 * dims.2;
    let mut data = Vec::with_capacity(len);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    ScalarField::from_vec(dims, data)
}

/// Reads a mask; rejects field-typed files and byte values other than 0/1.
pub fn read_mask(r: &mut impl Read) -> Result<BoolMask> {
    let (dims, dtype) = read_header(r)?;
    if dtype != DTYPE_MASK {
        return Err(Error::Format(format!("expected dtype 1 (mask), got {dtype}")));
    }
    let len = dims.0 * dims.1 * dims.2;
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    let mut data = Vec::with_capacity(len);
    for b in bytes {
        match b {
            0 => data.push(false),
            1 => data.push(true),
            other => return Err(Error::Format(format!("mask byte must be 0/1, got {other}"))),
        }
    }
    BoolMask::from_vec(dims, data)
}

/// Convenience file wrappers.
pub fn write_field_file(path: &std::path::Path, f: &ScalarField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut w, f)?;
    use std::io::Write as _;
    w.flush()?;
    Ok(())
}

pub fn write_mask_file(path: &std::path::Path, m: &BoolMask) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mask(&mut w, m)?;
    use std::io::Write as _;
    w.flush()?;
    Ok(())
}

pub fn read_field_file(path: &std::path::Path) -> Result<ScalarField> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_field(&mut r)
}

pub fn read_mask_file(path: &std::path::Path) -> Result<BoolMask> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_mask(&mut r)
}

//! Binary array files.
//!
//! Layout, all integers little-endian `u32`:
//!
//! ```text
//! "DBAR" | version | rank | dims[rank] | dtype | payload | crc32
//! ```
//!
//! dtype 1 is `f32`, 2 is interleaved complex `f32` (re, im), 3 is `f64`.
//! The payload is row-major. The CRC-32 covers every preceding byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DBAR";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DType {
    F32 = 1,
    Complex32 = 2,
    F64 = 3,
}

impl DType {
    fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Self::F32),
            2 => Some(Self::Complex32),
            3 => Some(Self::F64),
            _ => None,
        }
    }

    fn element_bytes(self) -> usize {
        match self {
            Self::F32 => 4,
            Self::Complex32 => 8,
            Self::F64 => 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArrayData {
    F32(Vec<f32>),
    /// Interleaved real and imaginary parts.
    Complex32(Vec<f32>),
    F64(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    pub dims: Vec<u32>,
    pub data: ArrayData,
}

impl Array {
    pub fn element_count(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn dtype(&self) -> DType {
        match self.data {
            ArrayData::F32(_) => DType::F32,
            ArrayData::Complex32(_) => DType::Complex32,
            ArrayData::F64(_) => DType::F64,
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.element_count();
        let stored = match &self.data {
            ArrayData::F32(v) => v.len(),
            ArrayData::Complex32(v) => v.len() / 2,
            ArrayData::F64(v) => v.len(),
        };
        let odd = matches!(&self.data, ArrayData::Complex32(v) if v.len() % 2 == 1);
        if stored != n || odd {
            return Err(Error::Format {
                file: PathBuf::new(),
                msg: format!("dims {:?} do not match {} stored values", self.dims, stored),
            });
        }
        Ok(())
    }
}

pub fn encode(array: &Array) -> Result<Vec<u8>> {
    array.check()?;
    let mut out = Vec::with_capacity(16 + 4 * array.dims.len() + array.element_count() * 8 + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(array.dims.len() as u32).to_le_bytes());
    for d in &array.dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.extend_from_slice(&(array.dtype() as u32).to_le_bytes());
    match &array.data {
        ArrayData::F32(v) | ArrayData::Complex32(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        ArrayData::F64(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn word(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
}

/// Trailing CRC of an encoded buffer, if long enough to hold one.
pub fn stored_checksum(bytes: &[u8]) -> Option<u32> {
    bytes.len().checked_sub(4).and_then(|at| word(bytes, at))
}

pub fn decode(bytes: &[u8], file: &Path) -> Result<Array> {
    let truncated = || Error::Truncated {
        file: file.to_path_buf(),
    };
    let format = |msg: String| Error::Format {
        file: file.to_path_buf(),
        msg,
    };
    if bytes.len() < 4 {
        return Err(truncated());
    }
    if &bytes[..4] != MAGIC {
        return Err(format("missing DBAR magic".into()));
    }
    let version = word(bytes, 4).ok_or_else(truncated)?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            file: file.to_path_buf(),
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let rank = word(bytes, 8).ok_or_else(truncated)? as usize;
    if rank > 16 {
        return Err(format(format!("implausible rank {rank}")));
    }
    let mut dims = Vec::with_capacity(rank);
    for r in 0..rank {
        dims.push(word(bytes, 12 + 4 * r).ok_or_else(truncated)?);
    }
    let header = 12 + 4 * rank + 4;
    let code = word(bytes, header - 4).ok_or_else(truncated)?;
    let dtype =
        DType::from_code(code).ok_or_else(|| format(format!("unknown dtype code {code}")))?;
    let count: usize = dims.iter().map(|&d| d as usize).product();
    let expected = header + count * dtype.element_bytes() + 4;
    if bytes.len() < expected {
        return Err(truncated());
    }
    if bytes.len() > expected {
        return Err(format(format!("{} trailing bytes", bytes.len() - expected)));
    }
    let body = &bytes[..expected - 4];
    if crc32fast::hash(body) != stored_checksum(bytes).unwrap() {
        return Err(Error::Checksum {
            file: file.to_path_buf(),
        });
    }
    let payload = &bytes[header..expected - 4];
    let data = match dtype {
        DType::F32 | DType::Complex32 => {
            let v: Vec<f32> = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if dtype == DType::F32 {
                ArrayData::F32(v)
            } else {
                ArrayData::Complex32(v)
            }
        }
        DType::F64 => ArrayData::F64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
    };
    Ok(Array { dims, data })
}

/// Write-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_array(path: &Path, array: &Array) -> Result<u32> {
    let bytes = encode(array)?;
    write_atomic(path, &bytes)?;
    Ok(stored_checksum(&bytes).unwrap())
}

pub fn read_array(path: &Path) -> Result<Array> {
    decode(&fs::read(path)?, path)
}

//! Binary snapshot format shared by density matrices and Wigner portraits.
//!
//! ```text
//! "WGRD" | u16 version | u16 flags | u32 rows | u32 cols
//! f64 row_min | f64 row_max | f64 col_min | f64 col_max
//! payload: rows·cols f64 (real) or rows·cols (re, im) pairs, row-major
//! ```
//!
//! Everything is little-endian. Flag bit 0 marks a complex payload. The
//! coordinate ranges are the first and last lattice values along each axis.

use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::state::DensityMatrix;
use crate::wigner::WignerGrid;

pub const MAGIC: [u8; 4] = *b"WGRD";
pub const VERSION: u16 = 1;
pub const FLAG_COMPLEX: u16 = 1;
pub const HEADER_LEN: usize = 48;

#[derive(Debug, Error)]
pub enum GridFileError {
    #[error("not a grid file (bad magic)")]
    BadMagic,
    #[error("unsupported grid file version {0}")]
    UnsupportedVersion(u16),
    #[error("grid file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("payload has {found} values for a {rows}x{cols} grid")]
    Shape { rows: u32, cols: u32, found: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridPayload {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl GridPayload {
    fn len(&self) -> usize {
        match self {
            GridPayload::Real(v) => v.len(),
            GridPayload::Complex(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub rows: u32,
    pub cols: u32,
    pub row_range: (f64, f64),
    pub col_range: (f64, f64),
    pub payload: GridPayload,
}

impl GridFile {
    pub fn new(rows: u32, cols: u32, row_range: (f64, f64), col_range: (f64, f64), payload: GridPayload) -> Result<Self, GridFileError> {
        if payload.len() != rows as usize * cols as usize {
            return Err(GridFileError::Shape { rows, cols, found: payload.len() });
        }
        Ok(Self { rows, cols, row_range, col_range, payload })
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.payload, GridPayload::Complex(_))
    }

    pub fn encode(&self) -> Result<Vec<u8>, GridFileError> {
        let flags = if self.is_complex() { FLAG_COMPLEX } else { 0 };
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len() * if self.is_complex() { 16 } else { 8 });
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&self.rows.to_le_bytes());
        out.extend_from_slice(&self.cols.to_le_bytes());
        for v in [self.row_range.0, self.row_range.1, self.col_range.0, self.col_range.1] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut put = |i: usize, v: f64| {
            if !v.is_finite() {
                return Err(GridFileError::NonFinite(i));
            }
            out.extend_from_slice(&v.to_le_bytes());
            Ok(())
        };
        match &self.payload {
            GridPayload::Real(values) => {
                for (i, &v) in values.iter().enumerate() {
                    put(i, v)?;
                }
            }
            GridPayload::Complex(values) => {
                for (i, z) in values.iter().enumerate() {
                    put(i, z.re)?;
                    put(i, z.im)?;
                }
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, GridFileError> {
        if bytes.len() < HEADER_LEN {
            return Err(GridFileError::Truncated { expected: HEADER_LEN, found: bytes.len() });
        }
        if bytes[..4] != MAGIC {
            return Err(GridFileError::BadMagic);
        }
        let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(GridFileError::UnsupportedVersion(version));
        }
        let complex = u16_at(6) & FLAG_COMPLEX != 0;
        let (rows, cols) = (u32_at(8), u32_at(12));
        let row_range = (f64_at(16), f64_at(24));
        let col_range = (f64_at(32), f64_at(40));
        let count = rows as usize * cols as usize;
        let width = if complex { 16 } else { 8 };
        let expected = HEADER_LEN + count * width;
        if bytes.len() != expected {
            return Err(GridFileError::Truncated { expected, found: bytes.len() });
        }
        let body = &bytes[HEADER_LEN..];
        let read = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().unwrap());
        let payload = if complex {
            GridPayload::Complex((0..count).map(|i| Complex64::new(read(2 * i), read(2 * i + 1))).collect())
        } else {
            GridPayload::Real((0..count).map(read).collect())
        };
        Ok(Self { rows, cols, row_range, col_range, payload })
    }
}

impl From<&WignerGrid> for GridFile {
    fn from(w: &WignerGrid) -> Self {
        let g = w.grid();
        let n = g.n();
        Self {
            rows: n as u32,
            cols: n as u32,
            row_range: (g.x(0), g.x(n - 1)),
            col_range: (g.p(0), g.p(n - 1)),
            payload: GridPayload::Real(w.values().to_vec()),
        }
    }
}

impl From<&DensityMatrix> for GridFile {
    fn from(rho: &DensityMatrix) -> Self {
        let g = rho.grid();
        let n = g.n();
        let span = (g.x(0), g.x(n - 1));
        Self { rows: n as u32, cols: n as u32, row_range: span, col_range: span, payload: GridPayload::Complex(rho.entries().to_vec()) }
    }
}

pub fn write_grid(grid: &GridFile, path: impl AsRef<Path>) -> Result<(), GridFileError> {
    std::fs::write(path, grid.encode()?)?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridFile, GridFileError> {
    GridFile::decode(&std::fs::read(path)?)
}

//! Real-stacked channel grids and the `WICE` binary container.
//!
//! ```text
//! "WICE" | version u16 | K_on u16 | I_d u16 | count u32 | flags u16 (bit 0: has_target)
//! count x ( input f32[2K_on * I_d] , [target f32[2K_on * I_d]] )
//! ```
//!
//! All integers and floats are little-endian; matrices are row-major.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const MAGIC: &[u8; 4] = b"WICE";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 16;
const FLAG_HAS_TARGET: u16 = 1;

/// `[Re(H); Im(H)]`, a `2K x N` real matrix.
pub fn complex_stack(h: &CMatrix) -> DMatrix<f64> {
    let k = h.nrows();
    DMatrix::from_fn(2 * k, h.ncols(), |r, c| {
        if r < k {
            h[(r, c)].re
        } else {
            h[(r - k, c)].im
        }
    })
}

pub fn complex_unstack(r: &DMatrix<f64>) -> Result<CMatrix> {
    if !r.nrows().is_multiple_of(2) {
        return Err(Error::Dimension(format!("{} rows cannot be unstacked", r.nrows())));
    }
    let k = r.nrows() / 2;
    Ok(CMatrix::from_fn(k, r.ncols(), |row, c| {
        Complex64::new(r[(row, c)], r[(row + k, c)])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    /// `2K_on x I_d` stacked estimate.
    pub input: DMatrix<f32>,
    /// `2K_on x I_d` stacked true channel; absent in prediction files.
    pub target: Option<DMatrix<f32>>,
}

impl DatasetRecord {
    pub fn from_complex(input: &CMatrix, target: Option<&CMatrix>) -> Self {
        let f = |m: &CMatrix| complex_stack(m).map(|v| v as f32);
        Self {
            input: f(input),
            target: target.map(f),
        }
    }

    pub fn input_complex(&self) -> CMatrix {
        complex_unstack(&self.input.map(f64::from)).expect("stacked rows are even")
    }

    pub fn target_complex(&self) -> Option<CMatrix> {
        self.target
            .as_ref()
            .map(|t| complex_unstack(&t.map(f64::from)).expect("stacked rows are even"))
    }
}

/// Container-level header fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub active: usize,
    pub data_symbols: usize,
    pub count: usize,
    pub has_target: bool,
}

pub fn write_dataset(
    path: &Path,
    active: usize,
    data_symbols: usize,
    records: &[DatasetRecord],
) -> Result<()> {
    let has_target = records.first().is_some_and(|r| r.target.is_some());
    let shape = (2 * active, data_symbols);
    for (n, r) in records.iter().enumerate() {
        if r.input.shape() != shape || r.target.as_ref().is_some_and(|t| t.shape() != shape) {
            return Err(Error::Dimension(format!(
                "record {n} does not match {}x{}",
                shape.0, shape.1
            )));
        }
        if r.target.is_some() != has_target {
            return Err(Error::Dimension(format!("record {n} disagrees on target presence")));
        }
    }
    let dim = |v: usize, what: &str| {
        u16::try_from(v).map_err(|_| Error::Format(format!("{what} = {v} exceeds u16")))
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim(active, "K_on")?.to_le_bytes())?;
    w.write_all(&dim(data_symbols, "I_d")?.to_le_bytes())?;
    let count = u32::try_from(records.len())
        .map_err(|_| Error::Format("more than u32::MAX records".into()))?;
    w.write_all(&count.to_le_bytes())?;
    let flags = if has_target { FLAG_HAS_TARGET } else { 0 };
    w.write_all(&flags.to_le_bytes())?;
    for r in records {
        write_matrix(&mut w, &r.input)?;
        if let Some(t) = &r.target {
            write_matrix(&mut w, t)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_matrix<W: Write>(w: &mut W, m: &DMatrix<f32>) -> Result<()> {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            w.write_all(&m[(r, c)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Vec<DatasetRecord>)> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    parse_dataset(&data)
}

pub fn parse_dataset(data: &[u8]) -> Result<(DatasetHeader, Vec<DatasetRecord>)> {
    let mut r = ByteReader::new(data);
    if data.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", data.len())));
    }
    if r.take(4)? != MAGIC {
        return Err(Error::Format("not a WICE dataset (bad magic)".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let active = r.u16()? as usize;
    let data_symbols = r.u16()? as usize;
    let count = r.u32()? as usize;
    let flags = r.u16()?;
    let has_target = flags & FLAG_HAS_TARGET != 0;
    let rows = 2 * active;
    let per = rows * data_symbols * 4 * if has_target { 2 } else { 1 };
    if r.remaining() != per * count {
        return Err(Error::Format(format!(
            "expected {} payload bytes for {count} records, found {}",
            per * count,
            r.remaining()
        )));
    }
    let read_matrix = |r: &mut ByteReader| -> Result<DMatrix<f32>> {
        let mut m = DMatrix::zeros(rows, data_symbols);
        for row in 0..rows {
            for c in 0..data_symbols {
                m[(row, c)] = f32::from_bits(r.u32()?);
            }
        }
        Ok(m)
    };
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let input = read_matrix(&mut r)?;
        let target = if has_target { Some(read_matrix(&mut r)?) } else { None };
        records.push(DatasetRecord { input, target });
    }
    let header = DatasetHeader {
        active,
        data_symbols,
        count,
        has_target,
    };
    Ok((header, records))
}

/// Little-endian cursor over a byte slice.
pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Format(format!(
                "truncated input: wanted {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice has N bytes"))
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }
}

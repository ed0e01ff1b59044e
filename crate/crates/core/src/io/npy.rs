//! Minimal NPY container for little-endian `f64` arrays in C order.
//!
//! Writes version 1.0 with the header padded so the data starts on a 64-byte
//! boundary; reads versions 1.0 and 2.0.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

fn header_text(shape: &[usize]) -> String {
    let dims = match shape {
        [n] => format!("({n},)"),
        _ => format!(
            "({})",
            shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
        ),
    };
    let mut h = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': {dims}, }}");
    let unpadded = MAGIC.len() + 2 + 2 + h.len() + 1;
    h.push_str(&" ".repeat((ALIGN - unpadded % ALIGN) % ALIGN));
    h.push('\n');
    h
}

/// Incremental writer for arrays too large to hold in memory at once.
pub struct NpyWriter {
    path: PathBuf,
    out: BufWriter<File>,
    shape: Vec<usize>,
    written: usize,
}

impl NpyWriter {
    pub fn create(path: &Path, shape: &[usize]) -> Result<Self> {
        let header = header_text(shape);
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::with_capacity(1 << 20, file);
        let io = |e| Error::io(path, e);
        out.write_all(MAGIC).map_err(io)?;
        out.write_all(&[1, 0]).map_err(io)?;
        out.write_all(&(header.len() as u16).to_le_bytes()).map_err(io)?;
        out.write_all(header.as_bytes()).map_err(io)?;
        Ok(NpyWriter {
            path: path.to_path_buf(),
            out,
            shape: shape.to_vec(),
            written: 0,
        })
    }

    pub fn append(&mut self, values: impl IntoIterator<Item = f64>) -> Result<()> {
        for v in values {
            self.out
                .write_all(&v.to_le_bytes())
                .map_err(|e| Error::io(&self.path, e))?;
            self.written += 1;
        }
        Ok(())
    }

    /// Flushes; fails if the value count does not match the declared shape.
    pub fn finish(mut self) -> Result<()> {
        let expected: usize = self.shape.iter().product();
        if self.written != expected {
            return Err(Error::Shape(format!(
                "wrote {} values for shape {:?} ({expected} expected)",
                self.written, self.shape
            )));
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Serialises `data` (C order) with the given shape.
pub fn write_npy_raw(path: &Path, shape: &[usize], data: impl Iterator<Item = f64>) -> Result<()> {
    let mut w = NpyWriter::create(path, shape)?;
    w.append(data)?;
    w.finish()
}

pub fn write_npy(path: &Path, a: ArrayView2<'_, f64>) -> Result<()> {
    write_npy_raw(path, &[a.nrows(), a.ncols()], a.iter().copied())
}

fn open_header(path: &Path) -> Result<(BufReader<File>, Vec<usize>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::with_capacity(1 << 20, file);
    let io = |e| Error::io(path, e);
    let bad = |m: &str| Error::format(path, m);
    let mut pre = [0u8; 8];
    r.read_exact(&mut pre).map_err(|_| bad("not an NPY file"))?;
    if &pre[..6] != MAGIC {
        return Err(bad("not an NPY file"));
    }
    let header_len = match pre[6] {
        1 => {
            let mut b = [0u8; 2];
            r.read_exact(&mut b).map_err(io)?;
            u16::from_le_bytes(b) as usize
        }
        2 | 3 => {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).map_err(io)?;
            u32::from_le_bytes(b) as usize
        }
        v => return Err(bad(&format!("unsupported NPY version {v}"))),
    };
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
    let header = String::from_utf8(header).map_err(|_| bad("header is not text"))?;
    let shape = parse_header(&header).map_err(|m| bad(&m))?;
    Ok((r, shape))
}

/// Shape from the header alone.
pub fn read_npy_shape(path: &Path) -> Result<Vec<usize>> {
    Ok(open_header(path)?.1)
}

/// Shape and C-order values of an `<f8` array.
pub fn read_npy_raw(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let (mut r, shape) = open_header(path)?;
    let io = |e| Error::io(path, e);
    let bad = |m: &str| Error::format(path, m);
    let n: usize = shape.iter().product();
    let mut data = Vec::with_capacity(n);
    let mut buf = vec![0u8; 1 << 16];
    let short = |got: usize| bad(&format!("expected {} data bytes for shape {shape:?}, found {got}", n * 8));
    while data.len() < n {
        let take = ((n - data.len()) * 8).min(buf.len());
        r.read_exact(&mut buf[..take]).map_err(|_| short(data.len() * 8))?;
        data.extend(
            buf[..take]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))),
        );
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra).map_err(io)? != 0 {
        return Err(bad(&format!("trailing bytes after {n} values of shape {shape:?}")));
    }
    Ok((shape, data))
}

pub fn read_npy(path: &Path) -> Result<Array2<f64>> {
    let (shape, data) = read_npy_raw(path)?;
    let dims = match shape[..] {
        [r, c] => (r, c),
        [n] => (n, 1),
        _ => {
            return Err(Error::format(path, format!("expected a 2-D array, found shape {shape:?}")));
        }
    };
    Ok(Array2::from_shape_vec(dims, data).expect("length checked against shape"))
}

fn dict_value<'a>(header: &'a str, key: &str) -> std::result::Result<&'a str, String> {
    let pat = format!("'{key}':");
    let start = header
        .find(&pat)
        .ok_or_else(|| format!("header lacks '{key}'"))?
        + pat.len();
    Ok(header[start..].trim_start())
}

fn parse_header(header: &str) -> std::result::Result<Vec<usize>, String> {
    let descr = dict_value(header, "descr")?;
    if !(descr.starts_with("'<f8'") || descr.starts_with("'float64'")) {
        return Err(format!("only little-endian float64 is supported, header: {header}"));
    }
    if !dict_value(header, "fortran_order")?.starts_with("False") {
        return Err("Fortran-ordered arrays are not supported".into());
    }
    let shape = dict_value(header, "shape")?;
    let close = shape.find(')').ok_or("unterminated shape tuple")?;
    let inner = shape
        .get(1..close)
        .filter(|_| shape.starts_with('('))
        .ok_or("malformed shape tuple")?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| format!("bad dimension '{s}'")))
        .collect()
}

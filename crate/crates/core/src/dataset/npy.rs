//! Minimal reader/writer for the numpy `.npy` array format.
//!
//! Only what embedding dumps need: format versions 1.0 and 2.0, little-endian
//! `f4`/`f8` element types, C order. Values are widened to `f64` on read; the
//! writer always emits `<f8`, so a float32 or float64 file read and written
//! back keeps every coordinate bit-for-bit.

use std::io::{self, Read, Write};

pub(crate) const MAGIC: &[u8; 6] = b"\x93NUMPY";

/// Element types understood by the reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// A dense array read from a `.npy` stream.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub dtype: Dtype,
    pub data: Vec<f64>,
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn read_array<R: Read>(reader: &mut R) -> io::Result<NpyArray> {
    let mut magic = [0u8; 6];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("missing \\x93NUMPY magic"));
    }
    let mut version = [0u8; 2];
    reader.read_exact(&mut version)?;
    let header_len = match version {
        [1, 0] => {
            let mut buf = [0u8; 2];
            reader.read_exact(&mut buf)?;
            u16::from_le_bytes(buf) as usize
        }
        [2, 0] => {
            let mut buf = [0u8; 4];
            reader.read_exact(&mut buf)?;
            u32::from_le_bytes(buf) as usize
        }
        [major, minor] => {
            return Err(invalid(format!("unsupported npy version {major}.{minor}")));
        }
    };
    let mut header = vec![0u8; header_len];
    reader.read_exact(&mut header)?;
    let header = std::str::from_utf8(&header).map_err(|_| invalid("header is not ASCII"))?;
    let (dtype, fortran_order, shape) = parse_header(header)?;
    if fortran_order {
        return Err(invalid("Fortran-order arrays are not supported"));
    }

    let count = shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .ok_or_else(|| invalid("shape overflows"))?;
    let mut raw = vec![0u8; count * dtype.size()];
    reader.read_exact(&mut raw)?;
    let data = match dtype {
        Dtype::F32 => raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        Dtype::F64 => raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect(),
    };
    Ok(NpyArray { shape, dtype, data })
}

/// Writes a C-order `<f8` array with a version 1.0 header.
pub fn write_array<W: Write>(writer: &mut W, shape: &[usize], data: &[f64]) -> io::Result<()> {
    debug_assert_eq!(shape.iter().product::<usize>(), data.len());
    let shape_str = match shape {
        [single] => format!("({single},)"),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': {shape_str}, }}");
    // Magic (6) + version (2) + length (2) + header must be a multiple of 64,
    // with the header terminated by a newline.
    let unpadded = 10 + header.len() + 1;
    let padding = (64 - unpadded % 64) % 64;
    header.extend(std::iter::repeat_n(' ', padding));
    header.push('\n');
    let header_len =
        u16::try_from(header.len()).map_err(|_| invalid("npy header too long for v1.0"))?;

    writer.write_all(MAGIC)?;
    writer.write_all(&[1, 0])?;
    writer.write_all(&header_len.to_le_bytes())?;
    writer.write_all(header.as_bytes())?;
    for v in data {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn parse_header(header: &str) -> io::Result<(Dtype, bool, Vec<usize>)> {
    let descr = dict_value(header, "descr")?;
    let descr = descr.trim().trim_matches(|c| c == '\'' || c == '"');
    let dtype = match descr {
        "<f4" => Dtype::F32,
        "<f8" => Dtype::F64,
        other if other.starts_with('>') => {
            return Err(invalid(format!(
                "big-endian dtype {other} is not supported"
            )))
        }
        other => return Err(invalid(format!("unsupported dtype {other}"))),
    };

    let fortran_order = match dict_value(header, "fortran_order")?.trim() {
        "False" => false,
        "True" => true,
        other => return Err(invalid(format!("bad fortran_order value {other}"))),
    };

    let shape_str = dict_value(header, "shape")?;
    let inner = shape_str
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| invalid("shape is not a tuple"))?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| invalid(format!("bad shape entry {s}")))
        })
        .collect::<io::Result<Vec<_>>>()?;
    Ok((dtype, fortran_order, shape))
}

/// Extracts the raw text of one value from the Python-literal header dict.
fn dict_value<'a>(header: &'a str, key: &str) -> io::Result<&'a str> {
    let missing = || invalid(format!("header has no '{key}' entry"));
    let start = header
        .find(&format!("'{key}'"))
        .or_else(|| header.find(&format!("\"{key}\"")))
        .ok_or_else(missing)?;
    let rest = &header[start + key.len() + 2..];
    let rest = rest
        .trim_start()
        .strip_prefix(':')
        .ok_or_else(missing)?
        .trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')').map(|i| i + 1)
    } else {
        rest.find([',', '}'])
    }
    .ok_or_else(missing)?;
    Ok(&rest[..end])
}

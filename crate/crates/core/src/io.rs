//! Binary grid files and number formatting for text outputs.
//!
//! Grid file layout: the 5-byte magic `DGPH1`, then little-endian `u32`
//! values `d`, `n_slices`, `n_1 .. n_d`, then `n_slices * n_1 * .. * n_d`
//! little-endian `f64` values in row-major order over `(t, x_1, .., x_d)`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"DGPH1";

/// Round-trippable decimal form with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Raw contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub n_slices: usize,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridData {
    fn expected_len(n_slices: usize, dims: &[usize]) -> usize {
        dims.iter().product::<usize>() * n_slices
    }
}

pub fn write_grid<W: Write>(mut w: W, data: &GridData) -> Result<()> {
    let expected = GridData::expected_len(data.n_slices, &data.dims);
    if data.values.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: data.values.len(),
        });
    }
    let mut buf = Vec::with_capacity(5 + 4 * (2 + data.dims.len()) + 8 * expected);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(data.dims.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(data.n_slices as u32).to_le_bytes());
    for &n in &data.dims {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in &data.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a grid file; `expected_dim` rejects files of another dimension.
pub fn read_grid<R: Read>(mut r: R, expected_dim: Option<usize>) -> Result<GridData> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut pos = MAGIC.len();
    let next_u32 = |pos: &mut usize| -> Result<usize> {
        let end = *pos + 4;
        if bytes.len() < end {
            return Err(Error::Truncated {
                expected: end,
                found: bytes.len(),
            });
        }
        let v = u32::from_le_bytes(bytes[*pos..end].try_into().unwrap());
        *pos = end;
        Ok(v as usize)
    };
    let d = next_u32(&mut pos)?;
    if let Some(e) = expected_dim {
        if e != d {
            return Err(Error::DimensionMismatch { expected: e, got: d });
        }
    }
    if d == 0 {
        return Err(Error::Format("zero dimension".into()));
    }
    let n_slices = next_u32(&mut pos)?;
    let mut dims = Vec::with_capacity(d);
    for _ in 0..d {
        dims.push(next_u32(&mut pos)?);
    }
    let count = GridData::expected_len(n_slices, &dims);
    let end = pos + 8 * count;
    if bytes.len() < end {
        return Err(Error::Truncated {
            expected: end,
            found: bytes.len(),
        });
    }
    if bytes.len() > end {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - end)));
    }
    let values = bytes[pos..end]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(GridData { n_slices, dims, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridData {
        GridData {
            n_slices: 2,
            dims: vec![3, 2],
            values: (0..12).map(|i| i as f64 * 0.1 - 0.3).collect(),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut buf = Vec::new();
        write_grid(&mut buf, &sample()).unwrap();
        assert_eq!(&buf[..5], b"DGPH1");
        assert_eq!(buf.len(), 5 + 4 * 4 + 8 * 12);
        let back = read_grid(&buf[..], Some(2)).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_grid(&mut buf, &sample()).unwrap();
        assert_eq!(u32::from_le_bytes(buf[5..9].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[9..13].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[13..17].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(buf[17..21].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(buf[21..29].try_into().unwrap()), -0.3);
    }

    #[test]
    fn rejects_bad_input() {
        let mut buf = Vec::new();
        write_grid(&mut buf, &sample()).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_grid(&bad[..], None), Err(Error::Format(_))));
        assert!(matches!(
            read_grid(&buf[..], Some(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            read_grid(&buf[..buf.len() - 3], None),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(read_grid(&buf[..7], None), Err(Error::Truncated { .. })));
        let mut wrong = sample();
        wrong.values.pop();
        assert!(write_grid(Vec::new(), &wrong).is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }
}

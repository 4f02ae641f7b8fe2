use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 4] = b"NLS4";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), reason: reason.into() }
}

pub fn encode_snapshot(f: &ComplexField) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_len().to_le_bytes());
    out.extend_from_slice(&f.t().to_le_bytes());
    for c in f.values() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[HEADER_LEN..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<ComplexField> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(format_err(path, format!("file of {} bytes is shorter than a header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(format_err(path, "bad magic"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    let (d, n) = (u32_at(8) as usize, u32_at(12) as usize);
    let (l, t) = (f64_at(16), f64_at(24));
    let payload_end = bytes.len() - 4;
    let stored = u32_at(payload_end);
    if crc32fast::hash(&bytes[HEADER_LEN..payload_end]) != stored {
        return Err(format_err(path, "checksum mismatch"));
    }
    let grid = GridSpec::new(d, n, l).map_err(|e| format_err(path, e.to_string()))?;
    if payload_end - HEADER_LEN != 16 * grid.len() {
        return Err(format_err(path, format!("payload holds {} bytes, expected {}", payload_end - HEADER_LEN, 16 * grid.len())));
    }
    let values = bytes[HEADER_LEN..payload_end]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexField::new(grid, t, values).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_snapshot(f: &ComplexField, path: &Path) -> Result<()> {
    fs::write(path, encode_snapshot(f))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<ComplexField> {
    decode_snapshot(&fs::read(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::InitialData;

    #[test]
    fn header_layout() {
        let g = GridSpec::new(4, 4, 2.0).unwrap();
        let f = ComplexField::zeros(g, 0.25);
        let b = encode_snapshot(&f);
        assert_eq!(b.len(), HEADER_LEN + 16 * 256 + 4);
        assert_eq!(&b[..4], b"NLS4");
        assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), 0.25);
    }

    #[test]
    fn round_trip_and_corruption() {
        let g = GridSpec::new(2, 8, 3.0).unwrap();
        let f = InitialData::DyadicBand { mass: 1.0, n: 2.0, seed: 9 }.build(&g).unwrap().with_time(1.5);
        let p = Path::new("mem");
        let b = encode_snapshot(&f);
        let back = decode_snapshot(&b, p).unwrap();
        assert_eq!(back.t(), 1.5);
        assert!(back.values().iter().zip(f.values()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        assert!(matches!(decode_snapshot(&b[..b.len() - 9], p), Err(Error::Format { .. })));
        let mut bad = b.clone();
        bad[40] ^= 1;
        assert!(matches!(decode_snapshot(&bad, p), Err(Error::Format { .. })));
        let mut magic = b;
        magic[0] = b'X';
        assert!(decode_snapshot(&magic, p).is_err());
    }
}

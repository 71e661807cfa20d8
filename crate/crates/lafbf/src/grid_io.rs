//! Bit-exact grid output (raw), display output (PGM), and raster input.
//!
//! Raw layout: 16-byte header — magic "LAFB", version u16 LE, rows u16 LE,
//! cols u32 LE, reserved u32 — followed by row-major f64 little-endian
//! values. PGM is binary P5 with per-image affine normalization to 0..255
//! (round half away from zero); constant grids map to 128.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::synthesis::FieldGrid;

pub const RAW_MAGIC: &[u8; 4] = b"LAFB";
pub const RAW_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Pgm,
    Raw,
}

impl std::str::FromStr for GridFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(GridFormat::Pgm),
            "raw" => Ok(GridFormat::Raw),
            other => Err(Error::Config(format!(
                "format must be 'pgm' or 'raw', got '{other}'"
            ))),
        }
    }
}

pub fn raw_bytes(grid: &FieldGrid) -> Vec<u8> {
    let rows = grid.size as u16;
    let cols = grid.size as u32;
    let mut out = Vec::with_capacity(16 + grid.values.len() * 8);
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&RAW_VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in &grid.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn pgm_bytes(grid: &FieldGrid) -> Vec<u8> {
    let n = grid.size;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    let min = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        let scale = 255.0 / (max - min);
        out.extend(grid.values.iter().map(|v| ((v - min) * scale).round() as u8));
    } else {
        out.extend(std::iter::repeat_n(128u8, n * n));
    }
    out
}

pub fn write_grid(grid: &FieldGrid, path: &Path, format: GridFormat, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::OutputExists(path.to_path_buf()));
    }
    let bytes = match format {
        GridFormat::Pgm => pgm_bytes(grid),
        GridFormat::Raw => raw_bytes(grid),
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Read back a raw grid file: (rows, cols, row-major values).
pub fn read_raw(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[0..4] != RAW_MAGIC {
        return Err(Error::Config(format!("{} is not a raw grid file", path.display())));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != RAW_VERSION {
        return Err(Error::Config(format!("unsupported raw version {version}")));
    }
    let rows = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let cols = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize;
    let expect = 16 + rows * cols * 8;
    if bytes.len() != expect {
        return Err(Error::Config(format!(
            "raw payload is {} bytes, expected {expect}",
            bytes.len()
        )));
    }
    let values = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

/// Plain-text raster: first line "rows cols", then row-major values in
/// radians (or scalar F values for gradient mode), whitespace-separated.
pub fn read_raster(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    parse_raster(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn parse_raster(text: &str) -> std::result::Result<(usize, usize, Vec<f64>), String> {
    let mut tokens = text.split_whitespace();
    let rows: usize = tokens
        .next()
        .ok_or("missing row count")?
        .parse()
        .map_err(|e| format!("bad row count: {e}"))?;
    let cols: usize = tokens
        .next()
        .ok_or("missing column count")?
        .parse()
        .map_err(|e| format!("bad column count: {e}"))?;
    let values: std::result::Result<Vec<f64>, String> = tokens
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad value '{t}': {e}")))
        .collect();
    let values = values?;
    if values.len() != rows * cols {
        return Err(format!(
            "expected {} values for {rows}x{cols}, got {}",
            rows * cols,
            values.len()
        ));
    }
    Ok((rows, cols, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::HurstIndex;
    use crate::synthesis::SynthesisParams;
    use proptest::prelude::*;

    fn grid(size: usize, values: Vec<f64>) -> FieldGrid {
        let p = SynthesisParams::new(
            HurstIndex::new(0.5).unwrap(),
            0.3,
            0.1,
            size - 1,
            0,
            false,
            0.3,
        )
        .unwrap();
        FieldGrid {
            size,
            values,
            params: p,
            orientation: "test".into(),
            plan_digest: 0,
        }
    }

    #[test]
    fn pgm_affine_map() {
        let g = grid(2, vec![0.0, 1.0, 2.0, 3.0]);
        let bytes = pgm_bytes(&g);
        assert_eq!(&bytes[bytes.len() - 4..], &[0u8, 85, 170, 255]);
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
    }

    #[test]
    fn pgm_constant_grid_is_mid_gray() {
        let g = grid(2, vec![7.5; 4]);
        let bytes = pgm_bytes(&g);
        assert_eq!(&bytes[bytes.len() - 4..], &[128u8; 4]);
    }

    #[test]
    fn raw_header_layout() {
        let g = grid(2, vec![0.0, 1.0, 2.0, 3.0]);
        let bytes = raw_bytes(&g);
        assert_eq!(&bytes[0..4], b"LAFB");
        assert_eq!(bytes[4..6], 1u16.to_le_bytes());
        assert_eq!(bytes[6..8], 2u16.to_le_bytes());
        assert_eq!(bytes[8..12], 2u32.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 32);
    }

    #[test]
    fn write_refuses_collision_without_force() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.raw");
        let g = grid(2, vec![0.0; 4]);
        write_grid(&g, &path, GridFormat::Raw, false).unwrap();
        assert!(matches!(
            write_grid(&g, &path, GridFormat::Raw, false),
            Err(Error::OutputExists(_))
        ));
        write_grid(&g, &path, GridFormat::Raw, true).unwrap();
    }

    #[test]
    fn raster_parse_rejects_wrong_count() {
        assert!(parse_raster("2 2 0.1 0.2 0.3").is_err());
        let (r, c, v) = parse_raster("2 2\n0.1 0.2\n0.3 0.4\n").unwrap();
        assert_eq!((r, c), (2, 2));
        assert_eq!(v, vec![0.1, 0.2, 0.3, 0.4]);
    }

    proptest! {
        #[test]
        fn prop_raw_roundtrip_bit_exact(values in proptest::collection::vec(-1e6f64..1e6, 16)) {
            let g = grid(4, values.clone());
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("g.raw");
            write_grid(&g, &path, GridFormat::Raw, false).unwrap();
            let (rows, cols, back) = read_raw(&path).unwrap();
            prop_assert_eq!((rows, cols), (4, 4));
            for (a, b) in back.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

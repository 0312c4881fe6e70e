//! On-disk formats: raw field dumps with a JSON sidecar, boundary CSV and
//! pretty JSON.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::grid::{BoundaryTrace, Grid, ScalarField};
use crate::{Error, Result};

/// Sidecar describing a field dump. `nx`, `ny` count nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub nx: usize,
    pub ny: usize,
    /// `[x0, y0, x1, y1]`
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
}

impl FieldHeader {
    pub fn of(grid: &Grid) -> Self {
        Self { nx: grid.nodes_x(), ny: grid.nodes_y(), bbox: grid.bbox() }
    }

    pub fn grid(&self) -> Result<Grid> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!("sidecar has {}x{} nodes", self.nx, self.ny)));
        }
        Grid::new(self.bbox, self.nx - 1, self.ny - 1)
    }
}

/// Sidecar path for a dump: `u.bin` -> `u.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write `field` as little-endian `f64`, row-major with `y` outer, plus
/// its sidecar.
pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * field.values.len());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    write_json(&sidecar_path(path), &FieldHeader::of(&field.grid))
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let header: FieldHeader = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let grid = header.grid()?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::InvalidGrid(format!(
            "{} holds {} bytes, sidecar implies {}",
            path.display(),
            bytes.len(),
            8 * grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    ScalarField::from_values(grid, values)
}

/// `loop_id,x,y` rows in loop order.
pub fn write_boundary_csv(path: &Path, trace: &BoundaryTrace) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    trace.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new([-1.0, 0.0, 2.0, 1.5], 30, 20).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0] * p[1] - 0.25);
        let path = dir.path().join("f.bin");
        write_field(&path, &f).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 8 * 31 * 21);
        let side: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("f.json")).unwrap()).unwrap();
        assert_eq!(side["nx"], 31);
        assert_eq!(side["box"][2], 2.0);
        assert_eq!(read_field(&path).unwrap(), f);
    }

    #[test]
    fn truncated_dump_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::centered(1.0, 16).unwrap();
        let path = dir.path().join("f.bin");
        write_field(&path, &ScalarField::zeros(g)).unwrap();
        fs::write(&path, [0u8; 16]).unwrap();
        assert!(read_field(&path).is_err());
    }
}

//! Strict JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certificates::CertificateOptions;
use crate::grid::{Grid, Shape, SourcePiece, SourceSpec};
use crate::io::read_field;
use crate::shapeopt::{DescentParams, GSpec, Init};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `[x0, y0, x1, y1]`
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    /// Cells per axis.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub pieces: Vec<SourcePiece>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GConfig {
    Constant { k: f64 },
    /// `k |x|^alpha`
    RadialPower { k: f64, alpha: f64 },
    /// Field dump (with sidecar), relative to the config file.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeInit {
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginInit {
    pub hull_margin_cells: f64,
}

/// `"hull+margin"`, `{"hull_margin_cells": m}` or `{"shape": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitConfig {
    Keyword(String),
    Margin(MarginInit),
    Shape(ShapeInit),
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig::Margin(MarginInit { hull_margin_cells: 4.0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write `boundary_####.csv` every this many accepted steps (0 disables).
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), snapshot_every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub f: SourceConfig,
    pub g: GConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub descent: DescentParams,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub certificates: CertificateOptions,
    /// Use `∫ g^2` in the bi-Laplacian functional.
    #[serde(default)]
    pub g_squared: bool,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.normalize()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Validate and rewrite shorthand so the resolved form is explicit.
    fn normalize(&mut self) -> Result<()> {
        if let InitConfig::Keyword(k) = &self.init {
            if k != "hull+margin" {
                return Err(Error::Config(format!("unknown init keyword {k:?}")));
            }
            self.init = InitConfig::default();
        }
        self.descent.validate()?;
        if !(self.certificates.tol_eq >= 0.0) {
            return Err(Error::Config("certificates.tol_eq must be nonnegative".into()));
        }
        self.grid()?;
        self.source()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.bbox, self.grid.n, self.grid.n)
    }

    pub fn source(&self) -> Result<SourceSpec> {
        SourceSpec::new(self.f.pieces.clone())
    }

    pub fn g_spec(&self) -> Result<GSpec> {
        let g = match &self.g {
            GConfig::Constant { k } => GSpec::Constant { k: *k },
            GConfig::RadialPower { k, alpha } => GSpec::RadialPower { k: *k, alpha: *alpha },
            GConfig::Table { path } => GSpec::Table(read_field(&self.base_dir.join(path))?),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn init(&self) -> Init {
        match &self.init {
            InitConfig::Shape(s) => Init::Shape(s.shape.clone()),
            InitConfig::Margin(m) => Init::HullMargin { margin_cells: m.hull_margin_cells },
            InitConfig::Keyword(_) => Init::default(),
        }
    }

    /// Output directory resolved against the config location.
    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.outputs.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RADIAL: &str = r#"{
        "grid": {"box": [-3, -3, 3, 3], "n": 64},
        "f": {"pieces": [{"shape": {"disk": {"center": [0, 0], "radius": 0.5}}, "value": 4}]},
        "g": {"kind": "constant", "k": 0.25},
        "init": "hull+margin"
    }"#;

    #[test]
    fn parses_and_fills_defaults() {
        let c = RunConfig::from_json(RADIAL).unwrap();
        assert_eq!(c.descent, DescentParams::default());
        assert_eq!(c.init, InitConfig::default());
        assert_eq!(c.g_spec().unwrap(), GSpec::Constant { k: 0.25 });
        assert_eq!(c.grid().unwrap().h(), 6.0 / 64.0);
        let resolved = serde_json::to_value(&c).unwrap();
        assert_eq!(resolved["descent"]["cfl"], 0.5);
        assert_eq!(resolved["outputs"]["snapshot_every"], 10);
        let back: RunConfig = serde_json::from_value(resolved).unwrap();
        assert_eq!(back.descent, c.descent);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = RADIAL.replace("\"init\"", "\"inti\"");
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::Config(_))));
        let bad = RADIAL.replace("\"k\": 0.25", "\"k\": 0.25, \"alpha\": 1");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = RADIAL.replace("\"n\": 64", "\"n\": 64, \"m\": 2");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = RADIAL.replace("hull+margin", "hull");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn shape_init_and_power_g() {
        let s = RADIAL
            .replace("\"hull+margin\"", r#"{"shape": {"disk": {"center": [0, 0], "radius": 1.5}}}"#)
            .replace(r#""kind": "constant", "k": 0.25"#, r#""kind": "radial_power", "k": 0.125, "alpha": 1"#);
        let c = RunConfig::from_json(&s).unwrap();
        assert_eq!(c.init(), Init::Shape(Shape::disk([0.0, 0.0], 1.5)));
        assert_eq!(c.g_spec().unwrap().eval([2.0, 0.0]), 0.25);
    }
}

//! Level-set solvers for the quadrature-surface problem `QS(f, g)` and the
//! bi-Laplacian cascade problem `B(f, g)` in two dimensions, together with a
//! registry of numerical existence certificates and radial reference
//! solutions.
//!
//! Sign convention used throughout: a level set `phi` describes the domain
//! `{phi < 0}`; outward normals are `grad phi / |grad phi|`.

pub mod certificates;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod pde;
pub mod shapeopt;

pub use error::{Error, Result};
pub use grid::{
    BoundaryTrace, Grid, LevelSet, Point, ScalarField, Shape, SourcePiece, SourceSpec,
};

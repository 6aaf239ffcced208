//! Explicit, geometry-derived bounds for Poincare-type constants of mesh
//! cells, the low-order face-mean and normal-flux interpolation operators
//! built on them, and a P1 finite-element oracle that computes the sharp
//! constants for cross-verification.
//!
//! The crate is organized around the pipeline
//! geometry -> scalar/vector bounds -> interpolation, with `oracle` providing
//! ground truth and `io` the cell/mesh file formats used by the CLI.

pub mod error;
pub mod fields;
pub mod geometry;
pub mod interpolation;
pub mod io;
pub mod mesh;
pub mod oracle;
pub mod quadrature;
pub mod reproduce;
pub mod scalar_bounds;
pub mod vector_bounds;

pub use error::{Error, Result};
pub use geometry::{Cell, CellKind, Face, FaceKind, NormalSystem, TMatrix};

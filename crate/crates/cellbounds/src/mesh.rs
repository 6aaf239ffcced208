//! Meshes of cells sharing a vertex list, with the shared-face adjacency
//! used by mesh-level interpolation.

use crate::error::{Error, Result};
use crate::geometry::{polygon_signed_area, Cell, CellKind, Point};

/// An interior face shared by exactly two cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedFace {
    /// Owning cell indices.
    pub cells: (usize, usize),
    /// Face index within each owning cell.
    pub faces: (usize, usize),
}

/// A cell in a mesh, keeping its global vertex indices.
#[derive(Debug, Clone)]
pub struct MeshCell {
    pub cell: Cell,
    pub global: Vec<usize>,
}

/// A conforming mesh of cells over a shared vertex list.
#[derive(Debug, Clone)]
pub struct CellMesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub cells: Vec<MeshCell>,
    /// Interior faces, each shared by exactly two cells.
    pub shared: Vec<SharedFace>,
    /// Boundary faces as (cell, face) pairs.
    pub boundary: Vec<(usize, usize)>,
}

impl CellMesh {
    /// Build a mesh from a shared vertex list and cell records. 2D cell
    /// index lists are normalized to counterclockwise order before
    /// construction so local and global vertex positions stay aligned.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        cell_records: Vec<(CellKind, Vec<usize>)>,
        declared_hull_measure: Option<f64>,
    ) -> Result<CellMesh> {
        let mut cells = Vec::with_capacity(cell_records.len());
        for (kind, mut idx) in cell_records {
            for &i in &idx {
                if i >= vertices.len() {
                    return Err(Error::InvalidGeometry(format!(
                        "cell vertex index {i} out of range"
                    )));
                }
            }
            if dim == 2 {
                let pts: Vec<Point> = idx.iter().map(|&i| vertices[i]).collect();
                if polygon_signed_area(&pts) < 0.0 {
                    idx.reverse();
                }
            }
            let pts: Vec<Point> = idx.iter().map(|&i| vertices[i]).collect();
            let cell = match (kind, dim) {
                (CellKind::Triangle, 2) => Cell::triangle(pts[0], pts[1], pts[2])?,
                (CellKind::Quadrilateral, 2) => {
                    Cell::quadrilateral([pts[0], pts[1], pts[2], pts[3]])?
                }
                (CellKind::GenericPolytope, 2) => Cell::polygon(pts)?,
                (CellKind::Tetrahedron, 3) => {
                    Cell::tetrahedron([pts[0], pts[1], pts[2], pts[3]])?
                }
                (CellKind::Pyramid, 3) => {
                    Cell::pyramid(pts[0], [pts[1], pts[2], pts[3], pts[4]])?
                }
                _ => {
                    return Err(Error::UnsupportedCellKind(format!(
                        "mesh cells of kind {} in dimension {dim}",
                        kind.name()
                    )))
                }
            };
            cells.push(MeshCell { cell, global: idx });
        }

        // match faces by sorted global vertex keys
        use std::collections::HashMap;
        let mut by_key: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (ci, mc) in cells.iter().enumerate() {
            for (fi, face) in mc.cell.faces().iter().enumerate() {
                let mut key: Vec<usize> = face.vertices.iter().map(|&v| mc.global[v]).collect();
                key.sort_unstable();
                by_key.entry(key).or_default().push((ci, fi));
            }
        }
        let mut shared = Vec::new();
        let mut boundary = Vec::new();
        let mut keys: Vec<_> = by_key.into_iter().collect();
        keys.sort();
        for (key, owners) in keys {
            match owners.len() {
                1 => boundary.push(owners[0]),
                2 => shared.push(SharedFace {
                    cells: (owners[0].0, owners[1].0),
                    faces: (owners[0].1, owners[1].1),
                }),
                n => {
                    return Err(Error::InvalidGeometry(format!(
                        "face {key:?} is shared by {n} cells"
                    )))
                }
            }
        }

        if let Some(hull) = declared_hull_measure {
            let total: f64 = cells
                .iter()
                .map(|c| c.cell.measure())
                .sum::<Result<f64>>()?;
            if (total - hull).abs() > 1e-9 * hull.abs().max(1.0) {
                return Err(Error::InvalidGeometry(format!(
                    "cells cover measure {total:.12e}, declared hull measure {hull:.12e}"
                )));
            }
        }

        Ok(CellMesh {
            dim,
            vertices,
            cells,
            shared,
            boundary,
        })
    }

    pub fn total_measure(&self) -> Result<f64> {
        self.cells.iter().map(|c| c.cell.measure()).sum()
    }

    /// Uniform nx x ny quadrilateral mesh of the unit square.
    pub fn uniform_unit_square(nx: usize, ny: usize) -> CellMesh {
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Point::new(
                    i as f64 / nx as f64,
                    j as f64 / ny as f64,
                    0.0,
                ));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut records = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                records.push((
                    CellKind::Quadrilateral,
                    vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                ));
            }
        }
        CellMesh::new(2, vertices, records, Some(1.0)).expect("uniform mesh is valid")
    }
}

/// Per-vertex nodal data interpreted as a piecewise-affine field over a
/// simplicial (triangle-cell) mesh.
pub struct NodalScalarField<'a> {
    mesh: &'a CellMesh,
    values: Vec<f64>,
}

impl<'a> NodalScalarField<'a> {
    pub fn new(mesh: &'a CellMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.vertices.len() {
            return Err(Error::InvalidPlan(format!(
                "{} nodal values for {} vertices",
                values.len(),
                mesh.vertices.len()
            )));
        }
        if mesh
            .cells
            .iter()
            .any(|c| c.cell.kind() != CellKind::Triangle)
        {
            return Err(Error::UnsupportedCellKind(
                "nodal fields require a triangle-cell mesh".into(),
            ));
        }
        Ok(NodalScalarField { mesh, values })
    }

    fn locate(&self, p: &Point) -> Option<(usize, [f64; 3])> {
        for (ci, mc) in self.mesh.cells.iter().enumerate() {
            let v = mc.cell.vertices();
            let total = (v[1] - v[0]).cross(&(v[2] - v[0])).z;
            if total.abs() <= 0.0 {
                continue;
            }
            let area = |a: &Point, b: &Point| ((b - a).cross(&(p - a))).z;
            let l0 = area(&v[1], &v[2]) / total;
            let l1 = area(&v[2], &v[0]) / total;
            let l2 = area(&v[0], &v[1]) / total;
            if l0 >= -1e-10 && l1 >= -1e-10 && l2 >= -1e-10 {
                return Some((ci, [l0, l1, l2]));
            }
        }
        None
    }

    /// Exact H1 seminorm of the piecewise-affine field.
    pub fn h1_seminorm(&self) -> f64 {
        let mut acc = 0.0;
        for mc in &self.mesh.cells {
            let v = mc.cell.vertices();
            let a2 = (v[1] - v[0]).cross(&(v[2] - v[0])).z;
            let rot = |p: &Point, q: &Point| {
                crate::geometry::Vector::new(p.y - q.y, q.x - p.x, 0.0) / a2
            };
            let grads = [rot(&v[1], &v[2]), rot(&v[2], &v[0]), rot(&v[0], &v[1])];
            let mut g = crate::geometry::Vector::zeros();
            for (k, gr) in grads.iter().enumerate() {
                g += gr * self.values[mc.global[k]];
            }
            acc += g.norm_squared() * a2.abs() / 2.0;
        }
        acc.sqrt()
    }
}

impl crate::fields::ScalarField for NodalScalarField<'_> {
    fn eval(&self, p: &Point) -> f64 {
        match self.locate(p) {
            Some((ci, l)) => {
                let g = &self.mesh.cells[ci].global;
                l[0] * self.values[g[0]] + l[1] * self.values[g[1]] + l[2] * self.values[g[2]]
            }
            None => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_mesh_adjacency() {
        let mesh = CellMesh::uniform_unit_square(2, 2);
        assert_eq!(mesh.cells.len(), 4);
        // 4 interior faces, 8 boundary edges
        assert_eq!(mesh.shared.len(), 4);
        assert_eq!(mesh.boundary.len(), 8);
        assert_relative_eq!(mesh.total_measure().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hull_measure_mismatch_is_detected() {
        let vertices = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let rec = vec![(CellKind::Triangle, vec![0, 1, 2])];
        assert!(CellMesh::new(2, vertices, rec, Some(1.0)).is_err());
    }
}

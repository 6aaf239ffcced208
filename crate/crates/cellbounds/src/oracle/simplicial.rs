//! Simplicial meshes of cells: canonical coarse splits, uniform red
//! refinement, and boundary facets tagged with the parent cell's faces.

use crate::error::{Error, Result};
use crate::geometry::{Cell, CellKind, Point, GEOMETRY_TOL};
use std::collections::HashMap;

/// A boundary facet (edge in 2D, triangle in 3D) with its parent-face tag.
#[derive(Debug, Clone)]
pub struct BoundaryFacet {
    pub verts: Vec<usize>,
    pub face: usize,
}

/// A conforming simplicial mesh refined from a cell.
#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    pub dim: usize,
    pub level: usize,
    pub vertices: Vec<Point>,
    pub tris: Vec<[usize; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub boundary: Vec<BoundaryFacet>,
    /// Number of faces of the parent cell (tag range).
    pub n_parent_faces: usize,
}

impl SimplicialMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        if self.dim == 2 {
            self.tris.len()
        } else {
            self.tets.len()
        }
    }

    /// Total measure of the tagged facets of one parent face.
    pub fn tagged_face_measure(&self, face: usize) -> f64 {
        self.boundary
            .iter()
            .filter(|b| b.face == face)
            .map(|b| self.facet_measure(&b.verts))
            .sum()
    }

    pub fn facet_measure(&self, verts: &[usize]) -> f64 {
        if self.dim == 2 {
            (self.vertices[verts[1]] - self.vertices[verts[0]]).norm()
        } else {
            let a = self.vertices[verts[0]];
            let b = self.vertices[verts[1]];
            let c = self.vertices[verts[2]];
            0.5 * (b - a).cross(&(c - a)).norm()
        }
    }

    pub fn total_measure(&self) -> f64 {
        if self.dim == 2 {
            self.tris
                .iter()
                .map(|t| {
                    let [a, b, c] = t.map(|i| self.vertices[i]);
                    0.5 * (b - a).cross(&(c - a)).norm()
                })
                .sum()
        } else {
            self.tets
                .iter()
                .map(|t| {
                    let [a, b, c, d] = t.map(|i| self.vertices[i]);
                    (b - a).cross(&(c - a)).dot(&(d - a)).abs() / 6.0
                })
                .sum()
        }
    }
}

/// Coarse canonical simplicial split of the cell, then `level` uniform red
/// refinements, with boundary facets tagged by parent face.
pub fn triangulate(cell: &Cell, level: usize) -> Result<SimplicialMesh> {
    let mut mesh = coarse_mesh(cell)?;
    for _ in 0..level {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

fn coarse_mesh(cell: &Cell) -> Result<SimplicialMesh> {
    if cell.kind() == CellKind::Macrocell {
        return coarse_macrocell(cell);
    }
    let dim = cell.dim();
    let vertices = cell.vertices().to_vec();
    let simplices = cell.canonical_simplex_indices().map_err(|_| {
        Error::UnsupportedCellKind(format!(
            "triangulation of {} cells is not supported",
            cell.kind().name()
        ))
    })?;
    let mut tris = Vec::new();
    let mut tets = Vec::new();
    for s in &simplices {
        if dim == 2 {
            tris.push([s[0], s[1], s[2]]);
        } else {
            tets.push([s[0], s[1], s[2], s[3]]);
        }
    }
    let mut mesh = SimplicialMesh {
        dim,
        level: 0,
        vertices,
        tris,
        tets,
        boundary: vec![],
        n_parent_faces: cell.faces().len(),
    };
    mesh.boundary = tag_boundary(cell, &mesh)?;
    Ok(mesh)
}

fn coarse_macrocell(cell: &Cell) -> Result<SimplicialMesh> {
    let dim = cell.dim();
    let scale = cell.diameter()?;
    let mut vertices: Vec<Point> = Vec::new();
    let quant = |p: &Point| -> (i64, i64, i64) {
        let s = GEOMETRY_TOL * scale.max(1.0) * 10.0;
        (
            (p.x / s).round() as i64,
            (p.y / s).round() as i64,
            (p.z / s).round() as i64,
        )
    };
    let mut lookup: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut tris = Vec::new();
    let mut tets = Vec::new();
    for child in cell.children() {
        let sub = coarse_mesh(child)?;
        let map: Vec<usize> = sub
            .vertices
            .iter()
            .map(|p| {
                *lookup.entry(quant(p)).or_insert_with(|| {
                    vertices.push(*p);
                    vertices.len() - 1
                })
            })
            .collect();
        for t in &sub.tris {
            tris.push([map[t[0]], map[t[1]], map[t[2]]]);
        }
        for t in &sub.tets {
            tets.push([map[t[0]], map[t[1]], map[t[2]], map[t[3]]]);
        }
    }
    let mut mesh = SimplicialMesh {
        dim,
        level: 0,
        vertices,
        tris,
        tets,
        boundary: vec![],
        n_parent_faces: cell.faces().len(),
    };
    mesh.boundary = tag_boundary(cell, &mesh)?;
    Ok(mesh)
}

/// Find mesh boundary facets (owned by exactly one element) and map each to
/// the parent face containing it.
fn tag_boundary(cell: &Cell, mesh: &SimplicialMesh) -> Result<Vec<BoundaryFacet>> {
    let mut count: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
    let mut add = |facet: Vec<usize>| {
        let mut key = facet.clone();
        key.sort_unstable();
        let e = count.entry(key).or_insert((0, facet));
        e.0 += 1;
    };
    if mesh.dim == 2 {
        for t in &mesh.tris {
            add(vec![t[0], t[1]]);
            add(vec![t[1], t[2]]);
            add(vec![t[2], t[0]]);
        }
    } else {
        for t in &mesh.tets {
            add(vec![t[1], t[2], t[3]]);
            add(vec![t[0], t[2], t[3]]);
            add(vec![t[0], t[1], t[3]]);
            add(vec![t[0], t[1], t[2]]);
        }
    }
    let tol = GEOMETRY_TOL * cell.diameter()? * 100.0;
    let mut boundary = Vec::new();
    let mut items: Vec<(usize, Vec<usize>)> = count.into_values().collect();
    items.sort();
    for (occurrences, facet) in items {
        if occurrences != 1 {
            continue;
        }
        let mid = Point::from(
            facet
                .iter()
                .map(|&v| mesh.vertices[v].coords)
                .sum::<crate::geometry::Vector>()
                / facet.len() as f64,
        );
        let face = (0..cell.faces().len()).find(|&f| {
            cell.face_contains(f, &mid, tol)
                && facet
                    .iter()
                    .all(|&v| cell.face_contains(f, &mesh.vertices[v], tol))
        });
        match face {
            Some(f) => boundary.push(BoundaryFacet {
                verts: facet,
                face: f,
            }),
            None => {
                return Err(Error::InvalidGeometry(format!(
                    "boundary facet {facet:?} lies on no parent face"
                )))
            }
        }
    }
    Ok(boundary)
}

/// One uniform red refinement: triangles split into 4, tetrahedra into 8
/// (corner cut plus the interior octahedron along a fixed diagonal), and
/// boundary facets into their children with inherited tags.
pub fn refine(mesh: &SimplicialMesh) -> SimplicialMesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = midpoints.get(&key) {
            return m;
        }
        let p = Point::from((vertices[a].coords + vertices[b].coords) / 2.0);
        vertices.push(p);
        let idx = vertices.len() - 1;
        midpoints.insert(key, idx);
        idx
    };

    let mut tris = Vec::with_capacity(mesh.tris.len() * 4);
    for t in &mesh.tris {
        let [a, b, c] = *t;
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        tris.push([a, ab, ca]);
        tris.push([ab, b, bc]);
        tris.push([ca, bc, c]);
        tris.push([ab, bc, ca]);
    }

    let mut tets = Vec::with_capacity(mesh.tets.len() * 8);
    for t in &mesh.tets {
        let [v0, v1, v2, v3] = *t;
        let m01 = mid(v0, v1, &mut vertices);
        let m02 = mid(v0, v2, &mut vertices);
        let m03 = mid(v0, v3, &mut vertices);
        let m12 = mid(v1, v2, &mut vertices);
        let m13 = mid(v1, v3, &mut vertices);
        let m23 = mid(v2, v3, &mut vertices);
        tets.push([v0, m01, m02, m03]);
        tets.push([v1, m01, m12, m13]);
        tets.push([v2, m02, m12, m23]);
        tets.push([v3, m03, m13, m23]);
        // octahedron cut along the (m02, m13) diagonal
        tets.push([m01, m02, m03, m13]);
        tets.push([m01, m02, m12, m13]);
        tets.push([m02, m03, m13, m23]);
        tets.push([m02, m12, m13, m23]);
    }

    let mut boundary = Vec::with_capacity(mesh.boundary.len() * if mesh.dim == 2 { 2 } else { 4 });
    for bf in &mesh.boundary {
        if mesh.dim == 2 {
            let (a, b) = (bf.verts[0], bf.verts[1]);
            let m = mid(a, b, &mut vertices);
            boundary.push(BoundaryFacet {
                verts: vec![a, m],
                face: bf.face,
            });
            boundary.push(BoundaryFacet {
                verts: vec![m, b],
                face: bf.face,
            });
        } else {
            let (a, b, c) = (bf.verts[0], bf.verts[1], bf.verts[2]);
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            for tri in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
                boundary.push(BoundaryFacet {
                    verts: tri.to_vec(),
                    face: bf.face,
                });
            }
        }
    }

    SimplicialMesh {
        dim: mesh.dim,
        level: mesh.level + 1,
        vertices,
        tris,
        tets,
        boundary,
        n_parent_faces: mesh.n_parent_faces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point2, point3};
    use approx::assert_relative_eq;

    #[test]
    fn triangle_level_zero_is_itself() {
        let tri =
            Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.0, 1.0)).unwrap();
        let mesh = triangulate(&tri, 0).unwrap();
        assert_eq!(mesh.n_elements(), 1);
        assert_eq!(mesh.boundary.len(), 3);
    }

    #[test]
    fn square_level_two_has_32_triangles() {
        let sq = Cell::quadrilateral([
            point2(0.0, 0.0),
            point2(1.0, 0.0),
            point2(1.0, 1.0),
            point2(0.0, 1.0),
        ])
        .unwrap();
        let mesh = triangulate(&sq, 2).unwrap();
        assert_eq!(mesh.n_elements(), 32);
        assert_relative_eq!(mesh.total_measure(), 1.0, epsilon = 1e-13);
        // tags cover all faces: tagged facet measures match face measures
        for f in 0..4 {
            assert_relative_eq!(
                mesh.tagged_face_measure(f),
                sq.face_measure(f).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn tet_refinement_preserves_volume_and_tags() {
        let tet = Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(0.0, 1.0, 0.0),
            point3(0.0, 0.0, 1.0),
        ])
        .unwrap();
        let mesh = triangulate(&tet, 2).unwrap();
        assert_eq!(mesh.n_elements(), 64);
        assert_relative_eq!(mesh.total_measure(), 1.0 / 6.0, epsilon = 1e-13);
        for f in 0..4 {
            assert_relative_eq!(
                mesh.tagged_face_measure(f),
                tet.face_measure(f).unwrap(),
                epsilon = 1e-12
            );
        }
        // every child tet keeps positive volume
        for t in &mesh.tets {
            let [a, b, c, d] = t.map(|i| mesh.vertices[i]);
            assert!((b - a).cross(&(c - a)).dot(&(d - a)).abs() > 1e-12);
        }
    }

    #[test]
    fn prism_and_pyramid_coarse_splits() {
        let prism = Cell::prism(
            vec![point2(0.0, 0.0), point2(1.0, 0.0), point2(1.0, 1.0), point2(0.0, 1.0)],
            vec![1.0; 4],
        )
        .unwrap();
        let mesh = triangulate(&prism, 1).unwrap();
        assert_eq!(mesh.n_elements(), 6 * 8);
        assert_relative_eq!(mesh.total_measure(), 1.0, epsilon = 1e-12);
        for f in 0..prism.faces().len() {
            assert_relative_eq!(
                mesh.tagged_face_measure(f),
                prism.face_measure(f).unwrap(),
                epsilon = 1e-12
            );
        }
        let pyr = Cell::pyramid(
            point3(0.5, 0.5, 1.0),
            [
                point3(0.0, 0.0, 0.0),
                point3(1.0, 0.0, 0.0),
                point3(1.0, 1.0, 0.0),
                point3(0.0, 1.0, 0.0),
            ],
        )
        .unwrap();
        let mesh = triangulate(&pyr, 0).unwrap();
        assert_eq!(mesh.n_elements(), 2);
        assert_relative_eq!(mesh.total_measure(), 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn macrocell_triangulation_is_conforming() {
        let a = Cell::quadrilateral([
            point2(0.0, 0.0),
            point2(1.0, 0.0),
            point2(1.0, 1.0),
            point2(0.0, 1.0),
        ])
        .unwrap();
        let b = a.transformed(
            &nalgebra::Rotation3::identity(),
            &crate::geometry::Vector::new(1.0, 0.0, 0.0),
        );
        let mac = Cell::macrocell(vec![a, b]).unwrap();
        let mesh = triangulate(&mac, 1).unwrap();
        assert_relative_eq!(mesh.total_measure(), 2.0, epsilon = 1e-12);
        // conforming: no boundary facet in the interior (x = 1 line is glued)
        for bf in &mesh.boundary {
            let m = Point::from(
                (mesh.vertices[bf.verts[0]].coords + mesh.vertices[bf.verts[1]].coords) / 2.0,
            );
            assert!(
                !(m.x > 0.999 && m.x < 1.001) || m.y < 1e-9 || m.y > 1.0 - 1e-9,
                "interior facet tagged as boundary at {m:?}"
            );
        }
    }

    #[test]
    fn unsupported_kind_is_reported() {
        let poly3 = Cell::polytope3(
            vec![
                point3(0.0, 0.0, 0.0),
                point3(1.0, 0.0, 0.0),
                point3(0.0, 1.0, 0.0),
                point3(0.0, 0.0, 1.0),
            ],
            vec![
                crate::geometry::Face::planar(vec![0, 1, 2]),
                crate::geometry::Face::planar(vec![0, 1, 3]),
                crate::geometry::Face::planar(vec![0, 2, 3]),
                crate::geometry::Face::planar(vec![1, 2, 3]),
            ],
        )
        .unwrap();
        assert!(matches!(
            triangulate(&poly3, 0),
            Err(Error::UnsupportedCellKind(_))
        ));
    }
}

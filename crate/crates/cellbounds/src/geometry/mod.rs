//! Cell and face geometry: measures, diameters, normals, and the small
//! matrices consumed by the bound formulas.
//!
//! Cells live in R^2 or R^3; 2D cells are embedded with z = 0. All types are
//! immutable after construction and all operations are pure functions.
//!
//! Orientation conventions: 2D cell boundaries are stored counterclockwise,
//! so the outward normal of an edge is the edge direction rotated by -90
//! degrees. Tetrahedron face normals point away from the opposite vertex.
//! Prism side normals come from the base orientation and pyramid base normals
//! point away from the apex. Faces of generic 3D polytopes are oriented by
//! the centroid test, which assumes the cell is star-shaped with respect to
//! its vertex centroid.

mod normals;

pub use normals::{jacobi_smallest_eigenvalue, NormalSystem, TMatrix};

use crate::error::{Error, Result};
use nalgebra::{Point3, Rotation3, Vector3};

/// Relative tolerance for coplanarity and unit-norm checks (scaled by diameter).
pub const GEOMETRY_TOL: f64 = 1e-9;
/// Validity threshold for |det N|; below it the vector constant blows up.
pub const DET_TOL: f64 = 1e-9;

pub type Point = Point3<f64>;
pub type Vector = Vector3<f64>;

/// Construct a 2D point (z = 0).
pub fn point2(x: f64, y: f64) -> Point {
    Point3::new(x, y, 0.0)
}

pub fn point3(x: f64, y: f64, z: f64) -> Point {
    Point3::new(x, y, z)
}

/// A face of a cell, referencing vertices of the owning cell.
///
/// Planar faces are single edges (2D) or planar polygons (3D). Curvilinear
/// faces carry an ordered list of sub-facets (index pairs in 2D, index
/// triples in 3D) that approximate the curve; integration is exact per
/// sub-facet.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub kind: FaceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaceKind {
    Planar,
    Curvilinear(Vec<Vec<usize>>),
}

impl Face {
    pub fn planar(vertices: Vec<usize>) -> Self {
        Face {
            vertices,
            kind: FaceKind::Planar,
        }
    }

    pub fn is_curvilinear(&self) -> bool {
        matches!(self.kind, FaceKind::Curvilinear(_))
    }

    /// Sub-facets as index lists: the face itself for planar 2D edges, a fan
    /// triangulation for planar 3D polygons, the stored list otherwise.
    pub fn subfacets(&self, dim: usize) -> Vec<Vec<usize>> {
        match &self.kind {
            FaceKind::Curvilinear(subs) => subs.clone(),
            FaceKind::Planar => {
                if dim == 2 {
                    vec![self.vertices.clone()]
                } else {
                    (1..self.vertices.len() - 1)
                        .map(|i| {
                            vec![self.vertices[0], self.vertices[i], self.vertices[i + 1]]
                        })
                        .collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Triangle,
    Quadrilateral,
    Tetrahedron,
    Pyramid,
    Prism,
    GenericPolytope,
    Macrocell,
}

impl CellKind {
    pub fn name(&self) -> &'static str {
        match self {
            CellKind::Triangle => "triangle",
            CellKind::Quadrilateral => "quadrilateral",
            CellKind::Tetrahedron => "tetrahedron",
            CellKind::Pyramid => "pyramid",
            CellKind::Prism => "prism",
            CellKind::GenericPolytope => "polytope",
            CellKind::Macrocell => "macrocell",
        }
    }
}

/// A bounded 2D or 3D mesh cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    kind: CellKind,
    dim: usize,
    vertices: Vec<Point>,
    faces: Vec<Face>,
    children: Vec<Cell>,
    /// Prism height samples, one per base vertex.
    heights: Vec<f64>,
    /// Prism base vertex count (vertices 0..n are the base polygon).
    base_len: usize,
    /// Macrocell gluing map: interior interfaces as (child a, face of a, child b, face of b).
    glue: Vec<(usize, usize, usize, usize)>,
    /// Macrocell boundary faces as (child index, face index within child).
    boundary: Vec<(usize, usize)>,
}

/// A simplex produced by the canonical cell split.
#[derive(Debug, Clone)]
pub enum Simplex {
    Tri([Point; 3]),
    Tet([Point; 4]),
}

impl Simplex {
    pub fn measure(&self) -> f64 {
        match self {
            Simplex::Tri([a, b, c]) => 0.5 * (b - a).cross(&(c - a)).norm(),
            Simplex::Tet([a, b, c, d]) => {
                ((b - a).cross(&(c - a)).dot(&(d - a))).abs() / 6.0
            }
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Simplex::Tri([a, b, c]) => Point::from((a.coords + b.coords + c.coords) / 3.0),
            Simplex::Tet([a, b, c, d]) => {
                Point::from((a.coords + b.coords + c.coords + d.coords) / 4.0)
            }
        }
    }

    pub fn points(&self) -> &[Point] {
        match self {
            Simplex::Tri(p) => p,
            Simplex::Tet(p) => p,
        }
    }
}

impl Cell {
    // ---- constructors -------------------------------------------------

    pub fn triangle(a: Point, b: Point, c: Point) -> Result<Cell> {
        let mut vertices = vec![a, b, c];
        ensure_planar_2d(&vertices)?;
        if polygon_signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let faces = polygon_edge_faces(3);
        let cell = Cell {
            kind: CellKind::Triangle,
            dim: 2,
            vertices,
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn quadrilateral(vs: [Point; 4]) -> Result<Cell> {
        let mut vertices = vs.to_vec();
        ensure_planar_2d(&vertices)?;
        if polygon_signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let faces = polygon_edge_faces(4);
        let cell = Cell {
            kind: CellKind::Quadrilateral,
            dim: 2,
            vertices,
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Generic simple polygon; vertices are normalized to counterclockwise order.
    pub fn polygon(vs: Vec<Point>) -> Result<Cell> {
        if vs.len() < 3 {
            return Err(Error::InvalidGeometry(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        let mut vertices = vs;
        ensure_planar_2d(&vertices)?;
        if polygon_signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let faces = polygon_edge_faces(vertices.len());
        let cell = Cell {
            kind: CellKind::GenericPolytope,
            dim: 2,
            vertices,
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Polygon with explicit face grouping (consecutive runs of the CCW
    /// boundary); runs of length > 2 may be marked curvilinear.
    pub fn polygon_with_faces(vs: Vec<Point>, faces: Vec<Face>) -> Result<Cell> {
        let vertices = vs;
        ensure_planar_2d(&vertices)?;
        if polygon_signed_area(&vertices) < 0.0 {
            return Err(Error::InvalidGeometry(
                "polygon with explicit faces must be counterclockwise".into(),
            ));
        }
        let cell = Cell {
            kind: CellKind::GenericPolytope,
            dim: 2,
            vertices,
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn tetrahedron(vs: [Point; 4]) -> Result<Cell> {
        let faces = vec![
            Face::planar(vec![1, 2, 3]),
            Face::planar(vec![0, 2, 3]),
            Face::planar(vec![0, 1, 3]),
            Face::planar(vec![0, 1, 2]),
        ];
        let cell = Cell {
            kind: CellKind::Tetrahedron,
            dim: 3,
            vertices: vs.to_vec(),
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Pyramid with apex first: vertices O, A, B, C, D. Face 0 is the base ABCD.
    pub fn pyramid(apex: Point, base: [Point; 4]) -> Result<Cell> {
        let vertices = vec![apex, base[0], base[1], base[2], base[3]];
        let faces = vec![
            Face::planar(vec![1, 2, 3, 4]),
            Face::planar(vec![0, 1, 2]),
            Face::planar(vec![0, 2, 3]),
            Face::planar(vec![0, 3, 4]),
            Face::planar(vec![0, 4, 1]),
        ];
        let cell = Cell {
            kind: CellKind::Pyramid,
            dim: 3,
            vertices,
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Prism over a base polygon in the z = 0 plane with per-vertex height
    /// samples: the cell {(x, y) in base, 0 <= z <= H(x, y)} with H the
    /// piecewise-affine interpolant of the samples. Face 0 is the base.
    pub fn prism(base: Vec<Point>, heights: Vec<f64>) -> Result<Cell> {
        let n = base.len();
        if n < 3 {
            return Err(Error::InvalidGeometry("prism base needs >= 3 vertices".into()));
        }
        if heights.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "prism: {} height samples for {} base vertices",
                heights.len(),
                n
            )));
        }
        let hmin = heights.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(hmin > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "prism heights must be positive, got minimum {hmin}"
            )));
        }
        let mut base = base;
        for p in &base {
            if p.z.abs() > GEOMETRY_TOL {
                return Err(Error::InvalidGeometry(
                    "prism base must lie in the z = 0 plane".into(),
                ));
            }
        }
        let mut heights = heights;
        if polygon_signed_area(&base) < 0.0 {
            base.reverse();
            heights.reverse();
        }
        let mut vertices = base.clone();
        for (p, h) in base.iter().zip(&heights) {
            vertices.push(point3(p.x, p.y, *h));
        }
        // base, top, then one side quad per base edge; a warped top (varying
        // heights) is stored as a curvilinear face triangulated like the base
        let const_height = heights
            .iter()
            .all(|h| (h - heights[0]).abs() <= GEOMETRY_TOL * heights[0].abs().max(1.0));
        let top = if const_height {
            Face::planar((n..2 * n).collect())
        } else {
            let tris = ear_clip(&base)?;
            Face {
                vertices: (n..2 * n).collect(),
                kind: FaceKind::Curvilinear(
                    tris.iter()
                        .map(|t| vec![t[0] + n, t[1] + n, t[2] + n])
                        .collect(),
                ),
            }
        };
        let mut faces = vec![Face::planar((0..n).collect()), top];
        for i in 0..n {
            let j = (i + 1) % n;
            faces.push(Face::planar(vec![i, j, n + j, n + i]));
        }
        let cell = Cell {
            kind: CellKind::Prism,
            dim: 3,
            vertices,
            faces,
            children: vec![],
            heights,
            base_len: n,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Axis-aligned box as a prism over an a x b rectangle with height c.
    pub fn rectangular_box(a: f64, b: f64, c: f64) -> Result<Cell> {
        Cell::prism(
            vec![point2(0.0, 0.0), point2(a, 0.0), point2(a, b), point2(0.0, b)],
            vec![c; 4],
        )
    }

    /// Generic 3D polytope with explicit faces; faces are validated planar
    /// and the surface closed. The cell must be star-shaped with respect to
    /// its vertex centroid.
    pub fn polytope3(vertices: Vec<Point>, faces: Vec<Face>) -> Result<Cell> {
        let cell = Cell {
            kind: CellKind::GenericPolytope,
            dim: 3,
            vertices,
            faces,
            children: vec![],
            heights: vec![],
            base_len: 0,
            glue: vec![],
            boundary: vec![],
        };
        cell.validate()?;
        cell.validate_closed_surface()?;
        Ok(cell)
    }

    /// Macrocell from child cells glued along coincident faces.
    pub fn macrocell(children: Vec<Cell>) -> Result<Cell> {
        if children.is_empty() {
            return Err(Error::InvalidGeometry("macrocell needs children".into()));
        }
        let dim = children[0].dim;
        if children.iter().any(|c| c.dim != dim) {
            return Err(Error::InvalidGeometry(
                "macrocell children must share one dimension".into(),
            ));
        }
        let scale: f64 = children
            .iter()
            .map(|c| c.diameter().unwrap_or(0.0))
            .fold(0.0, f64::max);
        // match faces between children by vertex sets (within tolerance)
        let mut keyed: Vec<(usize, usize, Vec<[i64; 3]>)> = Vec::new();
        for (ci, child) in children.iter().enumerate() {
            for (fi, face) in child.faces.iter().enumerate() {
                let mut key: Vec<[i64; 3]> = face
                    .vertices
                    .iter()
                    .map(|&v| quantize(&child.vertices[v], scale))
                    .collect();
                key.sort_unstable();
                keyed.push((ci, fi, key));
            }
        }
        let mut glue = Vec::new();
        let mut matched = vec![false; keyed.len()];
        for i in 0..keyed.len() {
            if matched[i] {
                continue;
            }
            for j in i + 1..keyed.len() {
                if !matched[j] && keyed[i].2 == keyed[j].2 && keyed[i].0 != keyed[j].0 {
                    glue.push((keyed[i].0, keyed[i].1, keyed[j].0, keyed[j].1));
                    matched[i] = true;
                    matched[j] = true;
                    break;
                }
            }
        }
        let boundary: Vec<(usize, usize)> = keyed
            .iter()
            .enumerate()
            .filter(|(i, _)| !matched[*i])
            .map(|(_, (ci, fi, _))| (*ci, *fi))
            .collect();
        // collect unique vertices and re-index boundary faces
        let mut vertices: Vec<Point> = Vec::new();
        let mut find_or_push = |p: &Point| -> usize {
            for (i, q) in vertices.iter().enumerate() {
                if (p - q).norm() <= GEOMETRY_TOL * scale.max(1.0) {
                    return i;
                }
            }
            vertices.push(*p);
            vertices.len() - 1
        };
        let mut faces = Vec::new();
        for &(ci, fi) in &boundary {
            let child = &children[ci];
            let face = &child.faces[fi];
            let verts: Vec<usize> = face
                .vertices
                .iter()
                .map(|&v| find_or_push(&child.vertices[v]))
                .collect();
            let kind = match &face.kind {
                FaceKind::Planar => FaceKind::Planar,
                FaceKind::Curvilinear(subs) => FaceKind::Curvilinear(
                    subs.iter()
                        .map(|s| {
                            s.iter()
                                .map(|&v| find_or_push(&child.vertices[v]))
                                .collect()
                        })
                        .collect(),
                ),
            };
            faces.push(Face {
                vertices: verts,
                kind,
            });
        }
        Ok(Cell {
            kind: CellKind::Macrocell,
            dim,
            vertices,
            faces,
            children,
            heights: vec![],
            base_len: 0,
            glue,
            boundary,
        })
    }

    // ---- accessors -----------------------------------------------------

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn children(&self) -> &[Cell] {
        &self.children
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    /// Macrocell gluing map: interior interfaces (child a, face a, child b, face b).
    pub fn glue_map(&self) -> &[(usize, usize, usize, usize)] {
        &self.glue
    }

    /// Macrocell boundary faces as (child, face-of-child) pairs, aligned with `faces()`.
    pub fn boundary_owners(&self) -> &[(usize, usize)] {
        &self.boundary
    }

    // ---- validation ----------------------------------------------------

    fn validate(&self) -> Result<()> {
        self.validate_except_planarity()?;
        let scale = self.diameter()?;
        for (fi, face) in self.faces.iter().enumerate() {
            if !face.is_curvilinear() && self.dim == 3 && face.vertices.len() > 3 {
                let dev = plane_deviation(&face.vertices, &self.vertices);
                if dev > GEOMETRY_TOL * scale {
                    return Err(Error::NonPlanarFace {
                        face: fi,
                        deviation: dev,
                    });
                }
            }
        }
        Ok(())
    }

    fn validate_except_planarity(&self) -> Result<()> {
        for p in &self.vertices {
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidGeometry("non-finite vertex coordinate".into()));
            }
            if self.dim == 2 && p.z != 0.0 {
                return Err(Error::InvalidGeometry(
                    "2D cell vertices must have z = 0".into(),
                ));
            }
        }
        for face in &self.faces {
            for &v in &face.vertices {
                if v >= self.vertices.len() {
                    return Err(Error::InvalidGeometry(format!(
                        "face vertex index {v} out of range"
                    )));
                }
            }
        }
        let d = self.diameter()?;
        let measure = self.measure()?;
        if measure <= (GEOMETRY_TOL * d).powi(self.dim as i32) {
            return Err(Error::DegenerateGeometry(format!(
                "cell measure {measure:.3e} vanishes"
            )));
        }
        Ok(())
    }

    fn validate_closed_surface(&self) -> Result<()> {
        use std::collections::HashMap;
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for face in &self.faces {
            let vs = &face.vertices;
            for i in 0..vs.len() {
                let a = vs[i];
                let b = vs[(i + 1) % vs.len()];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        if edge_count.values().any(|&c| c != 2) {
            return Err(Error::InvalidGeometry(
                "polytope surface is not closed: some edge is not shared by exactly two faces"
                    .into(),
            ));
        }
        Ok(())
    }

    // ---- measures ------------------------------------------------------

    /// Maximal pairwise vertex distance.
    pub fn diameter(&self) -> Result<f64> {
        let pts = self.all_vertices();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max((pts[i] - pts[j]).norm());
            }
        }
        if d <= 0.0 {
            return Err(Error::DegenerateGeometry(
                "all cell vertices coincide".into(),
            ));
        }
        Ok(d)
    }

    fn all_vertices(&self) -> Vec<Point> {
        if self.kind == CellKind::Macrocell {
            self.children
                .iter()
                .flat_map(|c| c.all_vertices())
                .collect()
        } else {
            self.vertices.clone()
        }
    }

    /// d-measure of the cell (area in 2D, volume in 3D).
    pub fn measure(&self) -> Result<f64> {
        match self.kind {
            CellKind::Macrocell => self.children.iter().map(|c| c.measure()).sum(),
            _ if self.dim == 2 => Ok(polygon_signed_area(&self.vertices).abs()),
            CellKind::Tetrahedron => {
                let v = &self.vertices;
                Ok(Simplex::Tet([v[0], v[1], v[2], v[3]]).measure())
            }
            _ => Ok(self
                .split_into_simplices()?
                .iter()
                .map(|s| s.measure())
                .sum()),
        }
    }

    /// (d-1)-measure of a face; curvilinear faces sum their sub-facets.
    pub fn face_measure(&self, face_idx: usize) -> Result<f64> {
        let face = self.face(face_idx)?;
        let mut total = 0.0;
        for sub in face.subfacets(self.dim) {
            total += self.subfacet_measure(&sub)?;
        }
        if total <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "face {face_idx} has zero measure"
            )));
        }
        Ok(total)
    }

    fn subfacet_measure(&self, sub: &[usize]) -> Result<f64> {
        if self.dim == 2 {
            let mut len = 0.0;
            for w in sub.windows(2) {
                len += (self.vertices[w[1]] - self.vertices[w[0]]).norm();
            }
            Ok(len)
        } else {
            let a = self.vertices[sub[0]];
            let b = self.vertices[sub[1]];
            let c = self.vertices[sub[2]];
            Ok(0.5 * (b - a).cross(&(c - a)).norm())
        }
    }

    pub fn face(&self, face_idx: usize) -> Result<&Face> {
        self.faces.get(face_idx).ok_or_else(|| {
            Error::InvalidFaceSelection(format!(
                "face index {face_idx} out of range ({} faces)",
                self.faces.len()
            ))
        })
    }

    /// Measure-weighted centroid.
    pub fn centroid(&self) -> Result<Point> {
        if self.kind == CellKind::Macrocell {
            let mut acc = Vector::zeros();
            let mut total = 0.0;
            for child in &self.children {
                let m = child.measure()?;
                acc += child.centroid()?.coords * m;
                total += m;
            }
            return Ok(Point::from(acc / total));
        }
        let mut acc = Vector::zeros();
        let mut total = 0.0;
        for s in self.split_into_simplices()? {
            let m = s.measure();
            acc += s.centroid().coords * m;
            total += m;
        }
        Ok(Point::from(acc / total))
    }

    pub fn face_centroid(&self, face_idx: usize) -> Result<Point> {
        let face = self.face(face_idx)?;
        let mut acc = Vector::zeros();
        let mut total = 0.0;
        for sub in face.subfacets(self.dim) {
            let m = self.subfacet_measure(&sub)?;
            let c: Vector = sub
                .iter()
                .map(|&v| self.vertices[v].coords)
                .sum::<Vector>()
                / sub.len() as f64;
            acc += c * m;
            total += m;
        }
        Ok(Point::from(acc / total))
    }

    // ---- normals ---------------------------------------------------------

    /// Outward unit normal of a planar face.
    pub fn outward_unit_normal(&self, face_idx: usize) -> Result<Vector> {
        let face = self.face(face_idx)?;
        if face.is_curvilinear() {
            return Err(Error::InvalidFaceSelection(format!(
                "face {face_idx} is curvilinear; use the mean normal"
            )));
        }
        self.subfacet_outward_normal(face_idx, &face.vertices.clone())
    }

    /// Outward unit normal of one sub-facet of a face (public entry point
    /// for integration over curvilinear faces).
    pub fn subfacet_unit_normal(&self, face_idx: usize, sub: &[usize]) -> Result<Vector> {
        self.subfacet_outward_normal(face_idx, sub)
    }

    /// Outward unit normal of one sub-facet of a face.
    fn subfacet_outward_normal(&self, face_idx: usize, sub: &[usize]) -> Result<Vector> {
        if self.dim == 2 {
            // CCW boundary: outward normal is the edge direction rotated -90 deg
            let a = self.vertices[sub[0]];
            let b = self.vertices[*sub.last().unwrap()];
            let d = b - a;
            let len = d.norm();
            if len <= 0.0 {
                return Err(Error::DegenerateGeometry("zero-length edge".into()));
            }
            return Ok(Vector::new(d.y / len, -d.x / len, 0.0));
        }
        let a = self.vertices[sub[0]];
        let b = self.vertices[sub[1]];
        let c = self.vertices[sub[2]];
        let n = (b - a).cross(&(c - a));
        let norm = n.norm();
        if norm <= 0.0 {
            return Err(Error::DegenerateGeometry("zero-area face".into()));
        }
        let mut n = n / norm;
        let inward_ref = self.orientation_reference(face_idx)?;
        let face_c = (a.coords + b.coords + c.coords) / 3.0;
        if n.dot(&(Point::from(face_c) - inward_ref)) < 0.0 {
            n = -n;
        }
        Ok(n)
    }

    /// Point inside the cell used to orient face normals outward.
    fn orientation_reference(&self, face_idx: usize) -> Result<Point> {
        match self.kind {
            CellKind::Tetrahedron => {
                // the vertex opposite the face
                let face = &self.faces[face_idx];
                let opp = (0..4)
                    .find(|v| !face.vertices.contains(v))
                    .expect("tetrahedron face leaves one vertex out");
                Ok(self.vertices[opp])
            }
            CellKind::Pyramid if face_idx == 0 => Ok(self.vertices[0]),
            _ => self.centroid(),
        }
    }

    /// Face-measure-weighted mean of sub-facet unit normals; for planar faces
    /// this equals the outward unit normal exactly.
    pub fn mean_normal(&self, face_idx: usize) -> Result<Vector> {
        let face = self.face(face_idx)?;
        if !face.is_curvilinear() {
            return self.outward_unit_normal(face_idx);
        }
        let subs = face.subfacets(self.dim);
        let mut normals = Vec::with_capacity(subs.len());
        let mut measures = Vec::with_capacity(subs.len());
        for sub in &subs {
            // split polyline runs into individual segments in 2D
            if self.dim == 2 {
                for w in sub.windows(2) {
                    normals.push(self.subfacet_outward_normal(face_idx, w)?);
                    measures.push(self.subfacet_measure(w)?);
                }
            } else {
                normals.push(self.subfacet_outward_normal(face_idx, sub)?);
                measures.push(self.subfacet_measure(sub)?);
            }
        }
        for i in 0..normals.len() {
            for j in i + 1..normals.len() {
                if normals[i].dot(&normals[j]) <= 0.0 {
                    return Err(Error::CurvilinearSignCondition { face: face_idx });
                }
            }
        }
        let total: f64 = measures.iter().sum();
        let mut mean = Vector::zeros();
        for (n, m) in normals.iter().zip(&measures) {
            mean += n * *m;
        }
        Ok(mean / total)
    }

    /// Selected-face normal system: unit outward normals for planar faces,
    /// mean normals for curvilinear ones.
    pub fn normal_system(&self, faces: &[usize]) -> Result<NormalSystem> {
        if faces.len() != self.dim {
            return Err(Error::InvalidFaceSelection(format!(
                "normal system needs exactly {} faces, got {}",
                self.dim,
                faces.len()
            )));
        }
        let normals: Result<Vec<Vector>> =
            faces.iter().map(|&f| self.mean_normal(f)).collect();
        NormalSystem::new(self.dim, normals?)
    }

    // ---- triangle-specific quantities -----------------------------------

    /// Interior angles adjacent to an edge of a triangle, at its two endpoints.
    pub fn triangle_edge_angles(&self, face_idx: usize) -> Result<(f64, f64)> {
        self.require_kind(CellKind::Triangle)?;
        let face = self.face(face_idx)?;
        let (a, c) = (face.vertices[0], face.vertices[1]);
        let b = (0..3).find(|v| *v != a && *v != c).unwrap();
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        Ok((angle_at(&pa, &pc, &pb), angle_at(&pc, &pa, &pb)))
    }

    /// Height of the triangle over the given edge: 2|T| / |edge|.
    pub fn triangle_height_over(&self, face_idx: usize) -> Result<f64> {
        self.require_kind(CellKind::Triangle)?;
        Ok(2.0 * self.measure()? / self.face_measure(face_idx)?)
    }

    /// Cotangent form of the flux-norm factor for a triangle edge:
    /// cot^2(alpha) + cot^2(beta) - cot(alpha) cot(beta) + 3, with alpha and
    /// beta the angles adjacent to the edge.
    pub fn sigma_alpha_beta(&self, face_idx: usize) -> Result<f64> {
        let (alpha, beta) = self.triangle_edge_angles(face_idx)?;
        if alpha <= 0.0 || beta <= 0.0 || alpha + beta >= std::f64::consts::PI {
            return Err(Error::DegenerateGeometry("degenerate triangle".into()));
        }
        let ca = cot(alpha);
        let cb = cot(beta);
        Ok(ca * ca + cb * cb - ca * cb + 3.0)
    }

    /// Equivalent vector form of `sigma_alpha_beta`:
    /// (|AB|^2 + |BC|^2 + (A-B).(C-B)) / h^2 with B the opposite vertex.
    pub fn sigma_vector_form(&self, face_idx: usize) -> Result<f64> {
        self.require_kind(CellKind::Triangle)?;
        let face = self.face(face_idx)?;
        let (a, c) = (face.vertices[0], face.vertices[1]);
        let b = (0..3).find(|v| *v != a && *v != c).unwrap();
        let ab = self.vertices[a] - self.vertices[b];
        let cb = self.vertices[c] - self.vertices[b];
        let h = self.triangle_height_over(face_idx)?;
        Ok((ab.norm_squared() + cb.norm_squared() + ab.dot(&cb)) / (h * h))
    }

    fn require_kind(&self, kind: CellKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::UnsupportedCellKind(format!(
                "expected {}, got {}",
                kind.name(),
                self.kind.name()
            )));
        }
        Ok(())
    }

    // ---- predicates ------------------------------------------------------

    /// Convexity check. Macrocells use a convex-hull area comparison in 2D
    /// and are conservatively treated as nonconvex in 3D.
    pub fn is_convex(&self) -> Result<bool> {
        let scale = self.diameter()?;
        match (self.kind, self.dim) {
            (CellKind::Macrocell, 2) => {
                let pts: Vec<Point> = self.all_vertices();
                let hull = convex_hull_area(&pts);
                Ok((hull - self.measure()?).abs() <= 1e-7 * scale * scale)
            }
            (CellKind::Macrocell, _) => Ok(if self.children.len() == 1 {
                self.children[0].is_convex()?
            } else {
                false
            }),
            (CellKind::Tetrahedron, _) => Ok(true),
            (_, 2) => Ok(polygon_is_convex(&self.vertices, scale)),
            _ => {
                // all vertices weakly on the inner side of each face plane
                for fi in 0..self.faces.len() {
                    let n = match self.mean_normal(fi) {
                        Ok(n) => n,
                        Err(_) => return Ok(false),
                    };
                    let c = self.face_centroid(fi)?;
                    for p in &self.vertices {
                        if n.dot(&(p - c)) > GEOMETRY_TOL * scale * 10.0 {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }

    /// Two triangle sides equal within tolerance.
    pub fn is_isosceles(&self) -> Result<bool> {
        self.require_kind(CellKind::Triangle)?;
        let d = self.diameter()?;
        let s: Vec<f64> = (0..3)
            .map(|i| self.face_measure(i))
            .collect::<Result<_>>()?;
        Ok((s[0] - s[1]).abs() <= 1e-9 * d
            || (s[1] - s[2]).abs() <= 1e-9 * d
            || (s[0] - s[2]).abs() <= 1e-9 * d)
    }

    // ---- canonical simplex split ------------------------------------------

    /// Coarse canonical split of the cell into simplices: a triangle/tet is
    /// itself, a quadrilateral splits along an internal diagonal, a pyramid
    /// into two tets over the base diagonal AC, a prism into three tets per
    /// wedge column, polygons by ear clipping, macrocells child-wise.
    pub fn split_into_simplices(&self) -> Result<Vec<Simplex>> {
        let v = &self.vertices;
        match self.kind {
            CellKind::Triangle => Ok(vec![Simplex::Tri([v[0], v[1], v[2]])]),
            CellKind::Tetrahedron => Ok(vec![Simplex::Tet([v[0], v[1], v[2], v[3]])]),
            CellKind::Quadrilateral => {
                let idx = quad_split_indices(v)?;
                Ok(idx
                    .iter()
                    .map(|t| Simplex::Tri([v[t[0]], v[t[1]], v[t[2]]]))
                    .collect())
            }
            CellKind::Pyramid => Ok(vec![
                Simplex::Tet([v[0], v[1], v[2], v[3]]),
                Simplex::Tet([v[0], v[1], v[3], v[4]]),
            ]),
            CellKind::Prism => {
                let mut out = Vec::new();
                for tet in self.prism_tet_indices()? {
                    out.push(Simplex::Tet([
                        v[tet[0]], v[tet[1]], v[tet[2]], v[tet[3]],
                    ]));
                }
                Ok(out)
            }
            CellKind::GenericPolytope if self.dim == 2 => {
                let tris = ear_clip(&self.vertices)?;
                Ok(tris
                    .iter()
                    .map(|t| Simplex::Tri([v[t[0]], v[t[1]], v[t[2]]]))
                    .collect())
            }
            CellKind::GenericPolytope => {
                // cone split from the vertex centroid; exact for star-shaped cells
                let c = Point::from(
                    v.iter().map(|p| p.coords).sum::<Vector>() / v.len() as f64,
                );
                let mut out = Vec::new();
                for face in &self.faces {
                    for sub in face.subfacets(3) {
                        out.push(Simplex::Tet([c, v[sub[0]], v[sub[1]], v[sub[2]]]));
                    }
                }
                Ok(out)
            }
            CellKind::Macrocell => {
                let mut out = Vec::new();
                for child in &self.children {
                    out.extend(child.split_into_simplices()?);
                }
                Ok(out)
            }
        }
    }

    /// Canonical simplex split as index tuples into `vertices()`; macrocells
    /// and generic 3D polytopes are not index-splittable (the former merge
    /// child meshes, the latter need a cone point).
    pub fn canonical_simplex_indices(&self) -> Result<Vec<Vec<usize>>> {
        let v = &self.vertices;
        match self.kind {
            CellKind::Triangle => Ok(vec![vec![0, 1, 2]]),
            CellKind::Tetrahedron => Ok(vec![vec![0, 1, 2, 3]]),
            CellKind::Quadrilateral => Ok(quad_split_indices(v)?
                .iter()
                .map(|t| t.to_vec())
                .collect()),
            CellKind::Pyramid => Ok(vec![vec![0, 1, 2, 3], vec![0, 1, 3, 4]]),
            CellKind::Prism => Ok(self
                .prism_tet_indices()?
                .iter()
                .map(|t| t.to_vec())
                .collect()),
            CellKind::GenericPolytope if self.dim == 2 => Ok(ear_clip(&self.vertices)?
                .iter()
                .map(|t| t.to_vec())
                .collect()),
            _ => Err(Error::UnsupportedCellKind(format!(
                "no canonical index split for {}",
                self.kind.name()
            ))),
        }
    }

    /// Tet split of a prism: base fan triangles (0, i, i+1) extruded into
    /// wedges, each cut into three tets with quad diagonals through the
    /// smallest vertex index so adjacent wedges match.
    pub fn prism_tet_indices(&self) -> Result<Vec<[usize; 4]>> {
        self.require_kind(CellKind::Prism)?;
        let n = self.base_len;
        let base: Vec<Point> = self.vertices[..n].to_vec();
        let tris = ear_clip(&base)?;
        let mut out = Vec::new();
        for t in tris {
            out.extend(wedge_tets([t[0], t[1], t[2], t[0] + n, t[1] + n, t[2] + n]));
        }
        Ok(out)
    }

    /// Mean of the prism height field over the base (piecewise-affine samples).
    pub fn prism_mean_height(&self) -> Result<f64> {
        self.require_kind(CellKind::Prism)?;
        let n = self.base_len;
        let base: Vec<Point> = self.vertices[..n].to_vec();
        let tris = ear_clip(&base)?;
        let mut vol = 0.0;
        let mut area = 0.0;
        for t in tris {
            let a = Simplex::Tri([base[t[0]], base[t[1]], base[t[2]]]).measure();
            let hmean = (self.heights[t[0]] + self.heights[t[1]] + self.heights[t[2]]) / 3.0;
            vol += a * hmean;
            area += a;
        }
        Ok(vol / area)
    }

    pub fn prism_min_height(&self) -> Result<f64> {
        self.require_kind(CellKind::Prism)?;
        Ok(self.heights.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    // ---- transformations ---------------------------------------------------

    /// Apply a rigid motion (2D rotations must keep the z = 0 plane).
    pub fn transformed(&self, rot: &Rotation3<f64>, shift: &Vector) -> Cell {
        let mut out = self.clone();
        out.vertices = self
            .vertices
            .iter()
            .map(|p| Point::from(rot * p.coords + shift))
            .collect();
        out.children = self
            .children
            .iter()
            .map(|c| c.transformed(rot, shift))
            .collect();
        out
    }

    /// Uniform scaling by s > 0 about the origin.
    pub fn scaled(&self, s: f64) -> Cell {
        let mut out = self.clone();
        out.vertices = self.vertices.iter().map(|p| Point::from(p.coords * s)).collect();
        out.children = self.children.iter().map(|c| c.scaled(s)).collect();
        out.heights = self.heights.iter().map(|h| h * s).collect();
        out
    }

    /// Point containment test via the canonical simplex split.
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        match self.split_into_simplices() {
            Ok(simplices) => simplices.iter().any(|s| simplex_contains(s, p, tol)),
            Err(_) => false,
        }
    }

    /// Whether a point lies on the given face (within an absolute tolerance).
    pub fn face_contains(&self, face_idx: usize, p: &Point, tol: f64) -> bool {
        let face = match self.face(face_idx) {
            Ok(f) => f,
            Err(_) => return false,
        };
        for sub in face.subfacets(self.dim) {
            if self.dim == 2 {
                for w in sub.windows(2) {
                    if point_segment_distance(p, &self.vertices[w[0]], &self.vertices[w[1]]) <= tol
                    {
                        return true;
                    }
                }
            } else if point_triangle_distance(
                p,
                &self.vertices[sub[0]],
                &self.vertices[sub[1]],
                &self.vertices[sub[2]],
            ) <= tol
            {
                return true;
            }
        }
        false
    }
}

fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn point_triangle_distance(p: &Point, a: &Point, b: &Point, c: &Point) -> f64 {
    let e1 = b - a;
    let e2 = c - a;
    let n = e1.cross(&e2);
    let nn = n.norm_squared();
    if nn == 0.0 {
        return f64::INFINITY;
    }
    let w = p - a;
    let dist_plane = w.dot(&n) / nn.sqrt();
    // barycentric coordinates of the in-plane projection
    let d11 = e1.dot(&e1);
    let d12 = e1.dot(&e2);
    let d22 = e2.dot(&e2);
    let w1 = w.dot(&e1);
    let w2 = w.dot(&e2);
    let det = d11 * d22 - d12 * d12;
    let u = (d22 * w1 - d12 * w2) / det;
    let v = (d11 * w2 - d12 * w1) / det;
    if u >= -1e-12 && v >= -1e-12 && u + v <= 1.0 + 1e-12 {
        dist_plane.abs()
    } else {
        // nearest point is on an edge
        [(a, b), (b, c), (c, a)]
            .iter()
            .map(|(x, y)| point_segment_distance(p, x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

// ---- free helpers -----------------------------------------------------

fn polygon_edge_faces(n: usize) -> Vec<Face> {
    (0..n).map(|i| Face::planar(vec![i, (i + 1) % n])).collect()
}

fn ensure_planar_2d(vs: &[Point]) -> Result<()> {
    if vs.iter().any(|p| p.z != 0.0) {
        return Err(Error::InvalidGeometry(
            "2D cell vertices must have z = 0".into(),
        ));
    }
    Ok(())
}

/// Shoelace signed area of a polygon in the z = 0 plane.
pub fn polygon_signed_area(vs: &[Point]) -> f64 {
    let n = vs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

fn polygon_is_convex(vs: &[Point], scale: f64) -> bool {
    let n = vs.len();
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let c = vs[(i + 2) % n];
        let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if cross < -GEOMETRY_TOL * scale * scale {
            return false;
        }
    }
    true
}

/// Convex hull area by monotone chain (2D points).
pub fn convex_hull_area(pts: &[Point]) -> f64 {
    let mut p: Vec<(f64, f64)> = pts.iter().map(|q| (q.x, q.y)).collect();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower = hull.len() + 1;
    for &q in p.iter().rev() {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    let n = hull.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        acc += a.0 * b.1 - b.0 * a.1;
    }
    acc.abs() / 2.0
}

fn plane_deviation(indices: &[usize], vertices: &[Point]) -> f64 {
    let a = vertices[indices[0]];
    let b = vertices[indices[1]];
    let c = vertices[indices[2]];
    let n = (b - a).cross(&(c - a));
    let norm = n.norm();
    if norm == 0.0 {
        return f64::INFINITY;
    }
    let n = n / norm;
    indices
        .iter()
        .map(|&i| n.dot(&(vertices[i] - a)).abs())
        .fold(0.0, f64::max)
}

fn angle_at(at: &Point, p: &Point, q: &Point) -> f64 {
    let u = p - at;
    let v = q - at;
    let c = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0);
    c.acos()
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn quantize(p: &Point, scale: f64) -> [i64; 3] {
    let s = GEOMETRY_TOL * scale.max(1.0) * 10.0;
    [
        (p.x / s).round() as i64,
        (p.y / s).round() as i64,
        (p.z / s).round() as i64,
    ]
}

/// Triangle indices for a simple quad split along an internal diagonal.
fn quad_split_indices(v: &[Point]) -> Result<[[usize; 3]; 2]> {
    let signed = |a: usize, b: usize, c: usize| {
        (v[b].x - v[a].x) * (v[c].y - v[a].y) - (v[b].y - v[a].y) * (v[c].x - v[a].x)
    };
    // CCW storage: diagonal 0-2 is internal iff both triangles keep positive area
    if signed(0, 1, 2) > 0.0 && signed(0, 2, 3) > 0.0 {
        Ok([[0, 1, 2], [0, 2, 3]])
    } else if signed(0, 1, 3) > 0.0 && signed(1, 2, 3) > 0.0 {
        Ok([[0, 1, 3], [1, 2, 3]])
    } else {
        Err(Error::DegenerateGeometry(
            "quadrilateral admits no internal diagonal".into(),
        ))
    }
}

/// Ear clipping of a simple CCW polygon; returns triangle index triples.
pub fn ear_clip(vs: &[Point]) -> Result<Vec<[usize; 3]>> {
    let n = vs.len();
    if n < 3 {
        return Err(Error::InvalidGeometry("polygon needs >= 3 vertices".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    let signed = |a: &Point, b: &Point, c: &Point| {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    };
    let scale = vs
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0f64, f64::max)
        .max(1.0);
    // points on the candidate ear's boundary must block it, otherwise a reflex
    // vertex sitting on the new diagonal pinches the remaining polygon
    let eps = -1e-12 * scale * scale;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (&vs[ia], &vs[ib], &vs[ic]);
            if signed(a, b, c) <= 0.0 {
                continue;
            }
            let mut ok = true;
            for &j in &idx {
                if j == ia || j == ib || j == ic {
                    continue;
                }
                let p = &vs[j];
                if signed(a, b, p) >= eps && signed(b, c, p) >= eps && signed(c, a, p) >= eps {
                    ok = false;
                    break;
                }
            }
            if ok {
                out.push([ia, ib, ic]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(Error::InvalidGeometry(
                "ear clipping failed: polygon may be self-intersecting".into(),
            ));
        }
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

/// Cut a wedge (w0..w2 bottom, w3..w5 top) into three tets, choosing quad
/// diagonals through the smallest index so that adjacent wedges agree.
pub fn wedge_tets(w: [usize; 6]) -> Vec<[usize; 4]> {
    // rotate so the smallest of all six indices sits at position 0 (bottom) or
    // is moved there by flipping the wedge upside down
    let min_pos = (0..6).min_by_key(|&i| w[i]).unwrap();
    let w = if min_pos < 3 {
        let r = min_pos;
        [
            w[r],
            w[(r + 1) % 3],
            w[(r + 2) % 3],
            w[3 + r],
            w[3 + (r + 1) % 3],
            w[3 + (r + 2) % 3],
        ]
    } else {
        let r = min_pos - 3;
        // flip: swap bottom and top, reverse winding to keep a valid wedge
        [
            w[3 + r],
            w[3 + (r + 2) % 3],
            w[3 + (r + 1) % 3],
            w[r],
            w[(r + 2) % 3],
            w[(r + 1) % 3],
        ]
    };
    if w[1].min(w[5]) < w[2].min(w[4]) {
        vec![
            [w[0], w[1], w[2], w[5]],
            [w[0], w[1], w[5], w[4]],
            [w[0], w[4], w[5], w[3]],
        ]
    } else {
        vec![
            [w[0], w[1], w[2], w[4]],
            [w[0], w[4], w[2], w[5]],
            [w[0], w[4], w[5], w[3]],
        ]
    }
}

fn simplex_contains(s: &Simplex, p: &Point, tol: f64) -> bool {
    match s {
        Simplex::Tri([a, b, c]) => {
            let area = |p0: &Point, p1: &Point, p2: &Point| {
                (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x)
            };
            let total = area(a, b, c);
            if total.abs() <= 0.0 {
                return false;
            }
            let l0 = area(p, b, c) / total;
            let l1 = area(a, p, c) / total;
            let l2 = area(a, b, p) / total;
            l0 >= -tol && l1 >= -tol && l2 >= -tol
        }
        Simplex::Tet([a, b, c, d]) => {
            let vol = |p0: &Point, p1: &Point, p2: &Point, p3: &Point| {
                (p1 - p0).cross(&(p2 - p0)).dot(&(p3 - p0))
            };
            let total = vol(a, b, c, d);
            if total.abs() <= 0.0 {
                return false;
            }
            let l0 = vol(p, b, c, d) / total;
            let l1 = vol(a, p, c, d) / total;
            let l2 = vol(a, b, p, d) / total;
            let l3 = vol(a, b, c, p) / total;
            l0 >= -tol && l1 >= -tol && l2 >= -tol && l3 >= -tol
        }
    }
}

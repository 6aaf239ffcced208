//! Exact P1 element matrices on simplicial meshes: stiffness, mass, and the
//! per-face boundary load vectors and boundary mass matrices.

use super::simplicial::SimplicialMesh;
use super::sparse::Csr;
use crate::geometry::Vector;

/// Assembled P1 system for one mesh.
pub struct AssembledSystem {
    pub n: usize,
    pub stiffness: Csr,
    pub mass: Csr,
    /// Per parent face: the load vector with entries int_Gamma phi_i.
    pub face_load: Vec<Vec<f64>>,
    /// Per parent face: the boundary mass matrix int_Gamma phi_i phi_j.
    pub face_mass: Vec<Csr>,
    /// Per parent face: its measure (sum of tagged facets).
    pub face_measure: Vec<f64>,
}

pub fn assemble(mesh: &SimplicialMesh) -> AssembledSystem {
    let n = mesh.n_vertices();
    let mut k_triplets = Vec::new();
    let mut m_triplets = Vec::new();

    if mesh.dim == 2 {
        for t in &mesh.tris {
            let [a, b, c] = t.map(|i| mesh.vertices[i]);
            let e1 = b - a;
            let e2 = c - a;
            let area2 = e1.x * e2.y - e1.y * e2.x;
            let area = area2.abs() / 2.0;
            let rot = |p: Vector| Vector::new(p.y, -p.x, 0.0) / area2;
            // hat gradients: rotated opposite edges over 2|T|
            let g = [rot(c - b), rot(a - c), rot(b - a)];
            for i in 0..3 {
                for j in 0..3 {
                    k_triplets.push((t[i], t[j], area * g[i].dot(&g[j])));
                    let m = area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
                    m_triplets.push((t[i], t[j], m));
                }
            }
        }
    } else {
        for t in &mesh.tets {
            let [a, b, c, d] = t.map(|i| mesh.vertices[i]);
            let e1 = b - a;
            let e2 = c - a;
            let e3 = d - a;
            let vol6 = e1.cross(&e2).dot(&e3);
            let vol = vol6.abs() / 6.0;
            let g1 = e2.cross(&e3) / vol6;
            let g2 = e3.cross(&e1) / vol6;
            let g3 = e1.cross(&e2) / vol6;
            let g = [-(g1 + g2 + g3), g1, g2, g3];
            for i in 0..4 {
                for j in 0..4 {
                    k_triplets.push((t[i], t[j], vol * g[i].dot(&g[j])));
                    let m = vol * if i == j { 1.0 / 10.0 } else { 1.0 / 20.0 };
                    m_triplets.push((t[i], t[j], m));
                }
            }
        }
    }

    let stiffness = Csr::from_triplets(n, &mut k_triplets);
    let mass = Csr::from_triplets(n, &mut m_triplets);

    let n_faces = mesh.n_parent_faces;
    let mut face_load = vec![vec![0.0; n]; n_faces];
    let mut face_mass_triplets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_faces];
    let mut face_measure = vec![0.0; n_faces];
    for bf in &mesh.boundary {
        let s = mesh.facet_measure(&bf.verts);
        face_measure[bf.face] += s;
        let k = bf.verts.len();
        for (i, &vi) in bf.verts.iter().enumerate() {
            face_load[bf.face][vi] += s / k as f64;
            for (j, &vj) in bf.verts.iter().enumerate() {
                let m = if mesh.dim == 2 {
                    s * if i == j { 1.0 / 3.0 } else { 1.0 / 6.0 }
                } else {
                    s * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 }
                };
                face_mass_triplets[bf.face].push((vi, vj, m));
            }
        }
    }
    let face_mass = face_mass_triplets
        .into_iter()
        .map(|mut t| Csr::from_triplets(n, &mut t))
        .collect();

    AssembledSystem {
        n,
        stiffness,
        mass,
        face_load,
        face_mass,
        face_measure,
    }
}

#[cfg(test)]
mod tests {
    use super::super::simplicial::triangulate;
    use super::*;
    use crate::geometry::{point2, point3, Cell};
    use approx::assert_relative_eq;

    #[test]
    fn stiffness_rows_sum_to_zero_and_mass_to_measure() {
        let tri =
            Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.0, 1.0)).unwrap();
        let mesh = triangulate(&tri, 2).unwrap();
        let sys = assemble(&mesh);
        for s in sys.stiffness.row_sums() {
            assert_relative_eq!(s, 0.0, epsilon = 1e-13);
        }
        let total: f64 = sys.mass.row_sums().iter().sum();
        assert_relative_eq!(total, 0.5, epsilon = 1e-13);
        // face loads sum to face measures
        for f in 0..3 {
            let b: f64 = sys.face_load[f].iter().sum();
            assert_relative_eq!(b, tri.face_measure(f).unwrap(), epsilon = 1e-12);
            let m: f64 = sys.face_mass[f].row_sums().iter().sum();
            assert_relative_eq!(m, tri.face_measure(f).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn tet_assembly_is_consistent() {
        let tet = Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(0.0, 1.0, 0.0),
            point3(0.0, 0.0, 1.0),
        ])
        .unwrap();
        let mesh = triangulate(&tet, 1).unwrap();
        let sys = assemble(&mesh);
        for s in sys.stiffness.row_sums() {
            assert_relative_eq!(s, 0.0, epsilon = 1e-13);
        }
        let total: f64 = sys.mass.row_sums().iter().sum();
        assert_relative_eq!(total, 1.0 / 6.0, epsilon = 1e-13);
        for f in 0..4 {
            let b: f64 = sys.face_load[f].iter().sum();
            assert_relative_eq!(b, tet.face_measure(f).unwrap(), epsilon = 1e-12);
        }
        // stiffness quadratic form of a linear function equals its exact energy
        let u: Vec<f64> = mesh.vertices.iter().map(|p| 2.0 * p.x - p.z).collect();
        let energy = sys.stiffness.quadratic_form(&u);
        assert_relative_eq!(energy, 5.0 / 6.0, epsilon = 1e-12);
    }
}

//! Property tests for the geometric invariants: rigid motions, scaling,
//! and the two routes to the triangle cotangent factor.

use cellbounds::geometry::{point2, point3, Cell, NormalSystem, TMatrix, Vector};
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

fn rotation_2d(angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), angle)
}

fn nondegenerate_triangle() -> impl Strategy<Value = Cell> {
    (
        -5.0..5.0,
        -5.0..5.0,
        -5.0..5.0,
        -5.0..5.0,
        -5.0..5.0,
        -5.0..5.0,
    )
        .prop_filter_map("degenerate", |(ax, ay, bx, by, cx, cy)| {
            let cell = Cell::triangle(point2(ax, ay), point2(bx, by), point2(cx, cy)).ok()?;
            let d = cell.diameter().ok()?;
            (cell.measure().ok()? > 0.05 * d * d).then_some(cell)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rigid_motions_preserve_triangle_quantities(
        tri in nondegenerate_triangle(),
        angle in 0.0..std::f64::consts::TAU,
        tx in -3.0..3.0,
        ty in -3.0..3.0,
    ) {
        let moved = tri.transformed(&rotation_2d(angle), &Vector::new(tx, ty, 0.0));
        prop_assert!((tri.diameter().unwrap() - moved.diameter().unwrap()).abs() <= 1e-10 * tri.diameter().unwrap());
        prop_assert!((tri.measure().unwrap() - moved.measure().unwrap()).abs() <= 1e-10 * tri.measure().unwrap());
        for f in 0..3 {
            let a = tri.sigma_alpha_beta(f).unwrap();
            let b = moved.sigma_alpha_beta(f).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            let fa = tri.face_measure(f).unwrap();
            let fb = moved.face_measure(f).unwrap();
            prop_assert!((fa - fb).abs() <= 1e-10 * fa);
        }
        let ns = tri.normal_system(&[0, 1]).unwrap();
        let ns2 = moved.normal_system(&[0, 1]).unwrap();
        prop_assert!((ns.det().abs() - ns2.det().abs()).abs() <= 1e-10);
        let l1 = TMatrix::from_normal_system(&ns).lambda_min();
        let l2 = TMatrix::from_normal_system(&ns2).lambda_min();
        prop_assert!((l1 - l2).abs() <= 1e-10);
    }

    #[test]
    fn scaling_laws_hold(
        tri in nondegenerate_triangle(),
        s in 0.1..10.0f64,
    ) {
        let scaled = tri.scaled(s);
        prop_assert!((scaled.diameter().unwrap() - s * tri.diameter().unwrap()).abs()
            <= 1e-10 * s * tri.diameter().unwrap());
        prop_assert!((scaled.measure().unwrap() - s * s * tri.measure().unwrap()).abs()
            <= 1e-9 * s * s * tri.measure().unwrap());
        for f in 0..3 {
            prop_assert!((scaled.face_measure(f).unwrap() - s * tri.face_measure(f).unwrap()).abs()
                <= 1e-10 * s * tri.face_measure(f).unwrap());
            let a = tri.sigma_alpha_beta(f).unwrap();
            let b = scaled.sigma_alpha_beta(f).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        let l1 = TMatrix::from_normal_system(&tri.normal_system(&[0, 2]).unwrap()).lambda_min();
        let l2 = TMatrix::from_normal_system(&scaled.normal_system(&[0, 2]).unwrap()).lambda_min();
        prop_assert!((l1 - l2).abs() <= 1e-10);
    }

    #[test]
    fn sigma_angle_form_matches_vector_form(tri in nondegenerate_triangle()) {
        for f in 0..3 {
            let a = tri.sigma_alpha_beta(f).unwrap();
            let b = tri.sigma_vector_form(f).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs(), "angle {a} vs vector {b}");
        }
    }

    #[test]
    fn t_matrix_trace_and_eigenvalue_range(
        beta in 0.05..3.1f64,
        rot in 0.0..std::f64::consts::TAU,
    ) {
        let n1 = Vector::new(rot.cos(), rot.sin(), 0.0);
        let n2 = Vector::new((rot + beta).cos(), (rot + beta).sin(), 0.0);
        let ns = NormalSystem::new(2, vec![n1, n2]).unwrap();
        let t = TMatrix::from_normal_system(&ns);
        prop_assert!((t.trace() - 2.0).abs() <= 1e-12);
        prop_assert!(t.lambda_min() > 0.0 && t.lambda_min() <= 1.0 + 1e-12);
        // closed form against the rotation iteration
        prop_assert!((t.lambda_min() - t.lambda_min_iterative()).abs() <= 1e-10);
    }
}

#[test]
fn sigma_forms_agree_on_a_thousand_random_triangles() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut produced = 0;
    while produced < 1000 {
        let p: Vec<_> = (0..3)
            .map(|_| point2(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let Ok(tri) = Cell::triangle(p[0], p[1], p[2]) else {
            continue;
        };
        let d = tri.diameter().unwrap();
        if tri.measure().unwrap() < 1e-3 * d * d {
            continue;
        }
        for f in 0..3 {
            let a = tri.sigma_alpha_beta(f).unwrap();
            let b = tri.sigma_vector_form(f).unwrap();
            assert!(
                (a - b).abs() <= 1e-9 * a.abs(),
                "triangle {p:?}, face {f}: {a} vs {b}"
            );
        }
        produced += 1;
    }
}

#[test]
fn mean_normal_equals_unit_normal_on_planar_faces() {
    let cells = [
        Cell::triangle(point2(0.0, 0.0), point2(2.0, 0.3), point2(0.4, 1.7)).unwrap(),
        Cell::quadrilateral([
            point2(0.0, 0.0),
            point2(1.5, -0.1),
            point2(1.4, 1.2),
            point2(-0.2, 1.0),
        ])
        .unwrap(),
        Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.1, 0.0),
            point3(0.2, 1.3, 0.0),
            point3(0.1, 0.4, 1.1),
        ])
        .unwrap(),
    ];
    for cell in &cells {
        for f in 0..cell.faces().len() {
            assert_eq!(
                cell.mean_normal(f).unwrap(),
                cell.outward_unit_normal(f).unwrap()
            );
        }
    }
}

#[test]
fn rigid_motion_invariance_in_3d() {
    let tet = Cell::tetrahedron([
        point3(0.0, 0.0, 0.0),
        point3(1.0, 0.0, 0.0),
        point3(0.0, 1.0, 0.0),
        point3(0.0, 0.0, 1.0),
    ])
    .unwrap();
    let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5)), 1.1);
    let moved = tet.transformed(&rot, &Vector::new(0.4, -0.7, 2.0));
    assert!((tet.measure().unwrap() - moved.measure().unwrap()).abs() <= 1e-12);
    assert!((tet.diameter().unwrap() - moved.diameter().unwrap()).abs() <= 1e-12);
    let l1 = TMatrix::from_normal_system(&tet.normal_system(&[0, 1, 2]).unwrap()).lambda_min();
    let l2 = TMatrix::from_normal_system(&moved.normal_system(&[0, 1, 2]).unwrap()).lambda_min();
    assert!((l1 - l2).abs() <= 1e-10);
}

//! The desk-scale reproduction suite: every published number the crate
//! reproduces, checked against the closed-form bounds and the finite-element
//! oracle with pinned tolerances. The CLI `reproduce` command and the
//! acceptance test target both run these criteria.

use crate::error::Result;
use crate::fields::{AnalyticScalar, Polynomial, PolyVector, ScalarField};
use crate::geometry::{point2, point3, Cell, NormalSystem, Point, TMatrix, Vector};
use crate::interpolation::{self as interp, CellQuadrature, ComparisonCell, MeshScalarPlan};
use crate::mesh::CellMesh;
use crate::oracle::{self, OracleOptions};
use crate::scalar_bounds::{self as scalar, CpMode, TRIANGLE_LEG_ZETA};
use crate::vector_bounds as vector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

/// One verified quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    /// "rel", "abs", or "le" (measured <= expected + tolerance).
    pub mode: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn rel(label: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Check {
        let passed = (measured - expected).abs() <= tol * expected.abs();
        Check {
            label: label.into(),
            measured,
            expected,
            tolerance: tol,
            mode: "rel",
            passed,
            note: None,
        }
    }

    fn abs(label: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Check {
        let passed = (measured - expected).abs() <= tol;
        Check {
            label: label.into(),
            measured,
            expected,
            tolerance: tol,
            mode: "abs",
            passed,
            note: None,
        }
    }

    fn le(label: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Check {
        Check {
            label: label.into(),
            measured,
            expected: bound,
            tolerance: slack,
            mode: "le",
            passed: measured <= bound + slack,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

/// One acceptance criterion with its checks.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: String,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub elapsed_ms: u128,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CriterionReport {
    fn finish(id: usize, title: &str, checks: Vec<Check>, notes: Vec<String>, t0: Instant) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        CriterionReport {
            id,
            title: title.to_string(),
            checks,
            passed,
            elapsed_ms: t0.elapsed().as_millis(),
            notes,
        }
    }
}

/// The whole suite.
#[derive(Debug, Clone, Serialize)]
pub struct Reproduction {
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ReproduceConfig {
    pub seed: u64,
    /// Oracle refinement level for 2D cells.
    pub level_2d: usize,
    /// Oracle refinement level for 3D cells.
    pub level_3d: usize,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            seed: 20240,
            level_2d: 5,
            level_3d: 4,
        }
    }
}

// ---- reference cells -------------------------------------------------------

pub fn unit_square() -> Cell {
    Cell::quadrilateral([
        point2(0.0, 0.0),
        point2(1.0, 0.0),
        point2(1.0, 1.0),
        point2(0.0, 1.0),
    ])
    .expect("unit square")
}

/// Right isosceles triangle with legs 1; faces: 0 = bottom leg, 1 =
/// hypotenuse, 2 = left leg.
pub fn unit_right_triangle() -> Cell {
    Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.0, 1.0))
        .expect("unit right triangle")
}

pub fn reference_tet() -> Cell {
    Cell::tetrahedron([
        point3(0.0, 0.0, 0.0),
        point3(1.0, 0.0, 0.0),
        point3(0.0, 1.0, 0.0),
        point3(0.0, 0.0, 1.0),
    ])
    .expect("reference tetrahedron")
}

pub fn equilateral_tet(h: f64) -> Cell {
    let base = [
        point3(0.0, 0.0, 0.0),
        point3(h, 0.0, 0.0),
        point3(h / 2.0, h * 3.0f64.sqrt() / 2.0, 0.0),
    ];
    let c = Point::from((base[0].coords + base[1].coords + base[2].coords) / 3.0);
    let apex = point3(c.x, c.y, h * (2.0f64 / 3.0).sqrt());
    Cell::tetrahedron([base[0], base[1], base[2], apex]).expect("equilateral tetrahedron")
}

fn two_triangle_square_macrocell() -> Cell {
    let t1 = Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(1.0, 1.0)).unwrap();
    let t2 = Cell::triangle(point2(0.0, 0.0), point2(1.0, 1.0), point2(0.0, 1.0)).unwrap();
    Cell::macrocell(vec![t1, t2]).unwrap()
}

fn random_triangle(rng: &mut ChaCha8Rng) -> Cell {
    loop {
        let p: Vec<Point> = (0..3)
            .map(|_| point2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(t) = Cell::triangle(p[0], p[1], p[2]) {
            if t.measure().unwrap() > 0.08 {
                return t;
            }
        }
    }
}

fn random_convex_quad(rng: &mut ChaCha8Rng) -> Cell {
    loop {
        // sorted angles on a circle give a convex polygon
        let mut angles: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..(2.0 * PI))).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if angles.windows(2).any(|w| w[1] - w[0] < 0.3) {
            continue;
        }
        let r = rng.random_range(0.5..1.5);
        let pts: Vec<Point> = angles
            .iter()
            .map(|a| point2(r * a.cos(), r * a.sin()))
            .collect();
        if let Ok(q) = Cell::quadrilateral([pts[0], pts[1], pts[2], pts[3]]) {
            if q.measure().unwrap() > 0.15 && q.is_convex().unwrap() {
                return q;
            }
        }
    }
}

// ---- criterion 1: exact-catalogue reproduction ------------------------------

pub fn criterion_table1(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let opts = OracleOptions::default();

    let rect = Cell::quadrilateral([
        point2(0.0, 0.0),
        point2(0.75, 0.0),
        point2(0.75, 0.5),
        point2(0.0, 0.5),
    ])
    .unwrap();
    let bx = Cell::rectangular_box(0.75, 0.5, 0.6).unwrap();
    let tri = unit_right_triangle();
    let rows: Vec<(&str, &Cell, Vec<usize>, usize)> = vec![
        ("rectangle, one side", &rect, vec![3], cfg.level_2d),
        ("rectangle, full boundary", &rect, vec![0, 1, 2, 3], cfg.level_2d),
        ("box, one face", &bx, vec![5], cfg.level_3d),
        ("triangle, leg", &tri, vec![0], cfg.level_2d),
        ("triangle, two legs", &tri, vec![0, 2], cfg.level_2d),
        ("triangle, hypotenuse", &tri, vec![1], cfg.level_2d),
    ];
    for (label, cell, gamma, level) in rows {
        let formula = scalar::exact_table1(cell, &gamma)
            .expect("catalogue lookup")
            .expect("catalogue row");
        let case = Instant::now();
        match oracle::sharp_c_gamma(cell, &gamma, level, &opts) {
            Ok(run) => {
                let secs = case.elapsed().as_secs_f64();
                let mut check = Check::rel(
                    format!("{label}: oracle vs catalogue formula"),
                    run.result.constant,
                    formula.value,
                    0.01,
                );
                if run.result.unknowns > 50_000 || secs > 60.0 {
                    check.passed = false;
                    check = check.with_note(format!(
                        "exceeded the desk budget: {} unknowns, {secs:.1} s",
                        run.result.unknowns
                    ));
                } else if !check.passed {
                    check = check.with_note(format!(
                        "oracle (extrapolated {:.6}) disagrees with the printed catalogue \
                         formula; see the operator comparison adjudication",
                        run.result.extrapolated_constant
                    ));
                }
                checks.push(check);
            }
            Err(e) => {
                checks.push(
                    Check::abs(format!("{label}: oracle run"), f64::NAN, 0.0, 0.0)
                        .with_note(format!("oracle failed: {e}")),
                );
            }
        }
    }
    notes.push(
        "the hypotenuse row compares against the printed catalogue formula sqrt(2) h / zeta; \
         the oracle reproduces h / (zeta sqrt(2)) instead, matching the operator-comparison \
         value (a factor-2 slip in the printed table)"
            .to_string(),
    );
    CriterionReport::finish(1, "exact-catalogue reproduction", checks, notes, t0)
}

// ---- criterion 2: triangle example chain -------------------------------------

pub fn criterion_triangle_chain(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let tri = unit_right_triangle();
    let upper = scalar::c_gamma_triangle(&tri, 0, CpMode::Convex).unwrap();
    let mut c = Check::abs("triangle majorant over a leg", upper.value, 0.6083, 1e-4);
    if !c.passed {
        c = c.with_note(
            "exact evaluation of sqrt(2/pi^2 + 4/24) = 0.607708; the printed 0.6083 \
             rounds intermediate factors (0.4757, 0.6354) before multiplying"
                .to_string(),
        );
    }
    checks.push(c);
    let exact = scalar::exact_table1(&tri, &[0]).unwrap().unwrap();
    checks.push(Check::abs("exact leg constant", exact.value, 0.4929, 1e-4));
    let lower = scalar::c_gamma_lower(&tri).unwrap();
    checks.push(Check::abs(
        "lower bound",
        lower.value,
        0.2079 * 2.0f64.sqrt(),
        1e-4,
    ));
    let run = oracle::sharp_c_gamma(&tri, &[0], cfg.level_2d, &OracleOptions::default()).unwrap();
    checks.push(Check::le(
        "oracle below the majorant",
        run.result.constant,
        upper.value,
        0.0,
    ));
    checks.push(Check::le(
        "lower bound below the oracle",
        lower.value,
        run.result.constant,
        0.0,
    ));
    notes.push(format!(
        "oracle constant {:.6} (extrapolated {:.6})",
        run.result.constant, run.result.extrapolated_constant
    ));
    CriterionReport::finish(2, "triangle example chain", checks, notes, t0)
}

// ---- criterion 3: tetrahedron values ------------------------------------------

pub fn criterion_tetrahedra(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let opts = OracleOptions::default();

    let eq = equilateral_tet(1.0);
    let eq_bound = scalar::c_gamma_tetrahedron(&eq, 3).unwrap();
    checks.push(Check::abs(
        "equilateral tetrahedron bound",
        eq_bound.value,
        0.39,
        0.005,
    ));
    let rt = reference_tet();
    let rt_bound = scalar::c_gamma_tetrahedron(&rt, 3).unwrap();
    checks.push(Check::abs(
        "right tetrahedron bound",
        rt_bound.value,
        0.54,
        0.005,
    ));
    let rt_run = oracle::sharp_c_gamma(&rt, &[3], cfg.level_3d, &opts).unwrap();
    checks.push(Check::rel(
        "right tetrahedron oracle vs published value",
        rt_run.result.extrapolated_constant,
        0.3756,
        0.01,
    ));
    checks.push(Check::le(
        "right tetrahedron oracle below its bound",
        rt_run.result.constant,
        rt_bound.value,
        0.0,
    ));
    let eq_run = oracle::sharp_c_gamma(&eq, &[3], cfg.level_3d, &opts).unwrap();
    checks.push(Check::le(
        "equilateral tetrahedron oracle below its bound",
        eq_run.result.constant,
        eq_bound.value,
        0.0,
    ));
    notes.push(format!(
        "oracle constants: right {:.5}, equilateral {:.5}",
        rt_run.result.extrapolated_constant, eq_run.result.extrapolated_constant
    ));
    CriterionReport::finish(3, "tetrahedron bounds and oracle", checks, notes, t0)
}

// ---- criterion 4: prism ratios --------------------------------------------------

pub fn criterion_prism_ratios(_cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let ratio = |a: f64| -> f64 {
        let cell = Cell::rectangular_box(a, a, 1.0).unwrap();
        let bound = scalar::c_gamma_prism(&cell, CpMode::Convex).unwrap();
        let exact = scalar::exact_table1(&cell, &[0]).unwrap().unwrap();
        bound.value / exact.value
    };
    checks.push(Check::abs(
        "cube ratio bound/exact",
        ratio(1.0),
        6.29f64.sqrt() / 2.0,
        1e-3,
    ));
    checks.push(Check::abs("ratio at a = b = 2H", ratio(2.0), 1.75, 0.01));
    // sweep a = b over [0.5 H, 4 H]
    let steps: Vec<f64> = (0..=35).map(|i| 0.5 + 0.1 * i as f64).collect();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &a in &steps {
        let r = ratio(a);
        if r > best.0 {
            best = (r, a);
        }
    }
    checks.push(Check::abs(
        "sweep maximum location",
        best.1,
        2.0,
        0.1 + 1e-12,
    ));
    notes.push(format!("sweep maximum ratio {:.4} at a = {:.2}", best.0, best.1));
    CriterionReport::finish(4, "prism bound/exact ratios", checks, notes, t0)
}

// ---- criterion 5: vector constants -----------------------------------------------

pub fn criterion_vector_constants(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // general composition dominates the two-face form on random pairs
    let mut min_gap = f64::INFINITY;
    let mut lambda_dev: f64 = 0.0;
    let mut dominated = true;
    for _ in 0..200 {
        let beta = rng.random_range(1e-6..(PI - 1e-6));
        let c1 = scalar::ConstantBound::user_supplied(rng.random_range(0.1..2.0));
        let c2 = scalar::ConstantBound::user_supplied(rng.random_range(0.1..2.0));
        let pair = vector::vector_constant_2d(&c1, &c2, beta).unwrap();
        let ns = NormalSystem::new(
            2,
            vec![
                Vector::new(1.0, 0.0, 0.0),
                Vector::new(beta.cos(), beta.sin(), 0.0),
            ],
        )
        .unwrap();
        let general = vector::vector_constant_general(&[c1, c2], &ns).unwrap();
        dominated &= general.value >= pair.value - 1e-12 * general.value;
        min_gap = min_gap.min(general.value - pair.value);
        let t = TMatrix::from_normal_system(&ns);
        lambda_dev = lambda_dev.max((t.lambda_min() - t.lambda_min_iterative()).abs());
    }
    let mut dom_check = Check::le(
        "two-face value below the general value (200 random pairs)",
        0.0,
        min_gap,
        1e-12,
    )
    .with_note(format!(
        "minimal gap {min_gap:.3e}; strict at every sampled angle (the two compositions never \
         coincide on (0, pi): at the right angle they differ by the factor sqrt 2)"
    ));
    dom_check.passed = dom_check.passed && dominated;
    checks.push(dom_check);
    checks.push(Check::le(
        "closed-form vs rotation-iteration smallest eigenvalue",
        lambda_dev,
        1e-10,
        0.0,
    ));

    // oracle below the composed bound on random cells and face pairs
    let mut worst_excess = f64::NEG_INFINITY;
    let mut count = 0;
    while count < 50 {
        let cell = if count % 2 == 0 {
            random_triangle(&mut rng)
        } else {
            random_convex_quad(&mut rng)
        };
        let nf = cell.faces().len();
        let f1 = rng.random_range(0..nf);
        let f2 = rng.random_range(0..nf);
        if f1 == f2 {
            continue;
        }
        let Ok(ns) = cell.normal_system(&[f1, f2]) else {
            continue;
        };
        if ns.det().abs() < 0.05 {
            continue;
        }
        let Ok(b1) = scalar::best_c_gamma_upper(&cell, &[f1], CpMode::Convex) else {
            continue;
        };
        let Ok(b2) = scalar::best_c_gamma_upper(&cell, &[f2], CpMode::Convex) else {
            continue;
        };
        let composed = vector::vector_constant(&[b1, b2], &ns).unwrap();
        let run = oracle::sharp_vector_constant(&cell, &[f1, f2], 3, &OracleOptions::default())
            .unwrap();
        worst_excess = worst_excess.max(run.result.constant - composed.value);
        count += 1;
    }
    checks.push(Check::le(
        "oracle vector constant below the composed bound (50 random cells)",
        worst_excess,
        0.0,
        1e-8,
    ));
    notes.push(format!("worst oracle-minus-bound excess {worst_excess:.3e}"));
    CriterionReport::finish(5, "vector constant compositions", checks, notes, t0)
}

// ---- criterion 6: interpolation inequalities ---------------------------------------

pub fn criterion_interpolation(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let notes = Vec::new();
    let quad = CellQuadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6e61);
    let n_fields = 100;

    let tri = unit_right_triangle();
    let sq = unit_square();
    let tet = reference_tet();
    let mac = two_triangle_square_macrocell();
    let mesh = CellMesh::uniform_unit_square(4, 4);
    let mesh_regions = interp::mesh_regions(&mesh);

    // scalar operators: label, error regions, ambient dimension, apply
    type ScalarApply<'a> = Box<dyn Fn(&AnalyticScalar) -> (Vec<f64>, f64, f64) + 'a>;
    let scalar_ops: Vec<(&str, Vec<&Cell>, usize, ScalarApply)> = vec![
        (
            "cell mean on the triangle",
            vec![&tri],
            2,
            Box::new(|w| {
                let i = interp::interp_mean_domain(w, &tri, &quad).unwrap();
                let resid = quad
                    .cell_mean(&tri, &|p: &Point| w.eval(p) - i.values[0])
                    .unwrap();
                (i.values.clone(), i.bound.value, resid.abs())
            }),
        ),
        (
            "cell mean on the tetrahedron",
            vec![&tet],
            3,
            Box::new(|w| {
                let i = interp::interp_mean_domain(w, &tet, &quad).unwrap();
                let resid = quad
                    .cell_mean(&tet, &|p: &Point| w.eval(p) - i.values[0])
                    .unwrap();
                (i.values.clone(), i.bound.value, resid.abs())
            }),
        ),
        (
            "face mean on the triangle leg",
            vec![&tri],
            2,
            Box::new(|w| {
                let i = interp::interp_mean_face(w, &tri, 0, CpMode::Convex, &quad).unwrap();
                let resid = quad
                    .face_mean(&tri, 0, &|p: &Point| w.eval(p) - i.values[0])
                    .unwrap();
                (i.values.clone(), i.bound.value, resid.abs())
            }),
        ),
        (
            "face mean on the square side",
            vec![&sq],
            2,
            Box::new(|w| {
                let i = interp::interp_mean_face(w, &sq, 3, CpMode::Convex, &quad).unwrap();
                let resid = quad
                    .face_mean(&sq, 3, &|p: &Point| w.eval(p) - i.values[0])
                    .unwrap();
                (i.values.clone(), i.bound.value, resid.abs())
            }),
        ),
        (
            "face mean on the tetrahedron base",
            vec![&tet],
            3,
            Box::new(|w| {
                let i = interp::interp_mean_face(w, &tet, 3, CpMode::Convex, &quad).unwrap();
                let resid = quad
                    .face_mean(&tet, 3, &|p: &Point| w.eval(p) - i.values[0])
                    .unwrap();
                (i.values.clone(), i.bound.value, resid.abs())
            }),
        ),
        (
            "macrocell scalar on the two-triangle square",
            interp::regions_of(&mac),
            2,
            Box::new(|w| {
                let gammas = [0usize, 0usize];
                let i = interp::interp_macrocell_scalar(w, &mac, &gammas, CpMode::Convex, &quad)
                    .unwrap();
                let mut resid: f64 = 0.0;
                for (child, (&g, v)) in mac.children().iter().zip(gammas.iter().zip(&i.values)) {
                    let r = quad
                        .face_mean(child, g, &|p: &Point| w.eval(p) - v)
                        .unwrap();
                    resid = resid.max(r.abs());
                }
                (i.values.clone(), i.bound.value, resid)
            }),
        ),
        (
            "mesh scalar on the 4x4 square mesh",
            mesh_regions.clone(),
            2,
            Box::new(|w| {
                let plan = MeshScalarPlan::FirstFace;
                let i = interp::interp_mesh_scalar(w, &mesh, &plan, CpMode::Convex, &quad).unwrap();
                let mut resid: f64 = 0.0;
                for (mc, v) in mesh.cells.iter().zip(&i.values) {
                    let r = quad
                        .face_mean(&mc.cell, 0, &|p: &Point| w.eval(p) - v)
                        .unwrap();
                    resid = resid.max(r.abs());
                }
                (i.values.clone(), i.bound.value, resid)
            }),
        ),
    ];

    for (label, regions, dim, apply) in &scalar_ops {
        let mut worst_slack = f64::NEG_INFINITY;
        let mut worst_resid: f64 = 0.0;
        let mut const_err: f64 = 0.0;
        let constant = Polynomial {
            terms: vec![(1.37, [0, 0, 0])],
        }
        .into_analytic("const");
        let (values, _, _) = apply(&constant);
        for v in values {
            const_err = const_err.max((v - 1.37).abs());
        }
        for _ in 0..n_fields {
            let w = Polynomial::random(&mut rng, 3, *dim).into_analytic("poly");
            let (values, bound, resid) = apply(&w);
            let err = interp::l2_error_scalar(&w, regions, &values, &quad).unwrap();
            let grad = interp::h1_seminorm_scalar(&w, regions, &quad).unwrap();
            worst_slack = worst_slack.max(err - bound * grad);
            worst_resid = worst_resid.max(resid);
        }
        checks.push(Check::le(
            format!("{label}: error within the bound"),
            worst_slack,
            0.0,
            1e-9,
        ));
        checks.push(Check::le(
            format!("{label}: mean preservation"),
            worst_resid,
            0.0,
            1e-12,
        ));
        checks.push(Check::le(
            format!("{label}: exact on constants"),
            const_err,
            0.0,
            1e-13,
        ));
    }

    // vector operators
    type VectorApply<'a> = Box<dyn Fn(&PolyVector) -> (Vec<Vector>, f64, f64) + 'a>;
    let vector_ops: Vec<(&str, Vec<&Cell>, usize, VectorApply)> = vec![
        (
            "vector cell on the triangle",
            vec![&tri],
            2,
            Box::new(|v| {
                let faces = [0usize, 2];
                let i = interp::interp_vector_cell(v, &tri, &faces, CpMode::Convex, &quad).unwrap();
                let r = interp::flux_preservation_residual(v, &tri, &faces, &i.values[0], &quad)
                    .unwrap();
                (i.values.clone(), i.bound.value, r)
            }),
        ),
        (
            "vector cell on the square",
            vec![&sq],
            2,
            Box::new(|v| {
                let faces = [3usize, 0];
                let i = interp::interp_vector_cell(v, &sq, &faces, CpMode::Convex, &quad).unwrap();
                let r = interp::flux_preservation_residual(v, &sq, &faces, &i.values[0], &quad)
                    .unwrap();
                (i.values.clone(), i.bound.value, r)
            }),
        ),
        (
            "vector cell on the tetrahedron",
            vec![&tet],
            3,
            Box::new(|v| {
                let faces = [1usize, 2, 3];
                let i = interp::interp_vector_cell(v, &tet, &faces, CpMode::Convex, &quad).unwrap();
                let r = interp::flux_preservation_residual(v, &tet, &faces, &i.values[0], &quad)
                    .unwrap();
                (i.values.clone(), i.bound.value, r)
            }),
        ),
        (
            "vector macrocell on the two-triangle square",
            interp::regions_of(&mac),
            2,
            Box::new(|v| {
                let gammas = [0usize, 0usize];
                let plan = interp::PairPlan::greedy(&mac, &gammas).unwrap();
                let i = interp::interp_macrocell_vector(v, &mac, &plan, CpMode::Convex, &quad)
                    .unwrap();
                let mut r: f64 = 0.0;
                for (child, (&g, val)) in mac.children().iter().zip(gammas.iter().zip(&i.values)) {
                    r = r.max(
                        interp::flux_preservation_residual(v, child, &[g], val, &quad).unwrap(),
                    );
                }
                (i.values.clone(), i.bound.value, r)
            }),
        ),
        (
            "vector mesh on the 4x4 square mesh",
            mesh_regions.clone(),
            2,
            Box::new(|v| {
                let i = interp::interp_mesh_vector(v, &mesh, CpMode::Convex, &quad).unwrap();
                let mut r: f64 = 0.0;
                for (mc, val) in mesh.cells.iter().zip(&i.values) {
                    let faces = interp::first_independent_faces(&mc.cell).unwrap();
                    r = r.max(
                        interp::flux_preservation_residual(v, &mc.cell, &faces, val, &quad)
                            .unwrap(),
                    );
                }
                (i.values.clone(), i.bound.value, r)
            }),
        ),
    ];

    for (label, regions, dim, apply) in &vector_ops {
        let mut worst_slack = f64::NEG_INFINITY;
        let mut worst_resid: f64 = 0.0;
        let mut const_err: f64 = 0.0;
        let constant = PolyVector {
            components: [
                Polynomial {
                    terms: vec![(0.4, [0, 0, 0])],
                },
                Polynomial {
                    terms: vec![(-0.9, [0, 0, 0])],
                },
                Polynomial {
                    terms: vec![(if *dim == 3 { 0.25 } else { 0.0 }, [0, 0, 0])],
                },
            ],
        };
        let (values, _, _) = apply(&constant);
        for v in values {
            const_err = const_err.max((v.x - 0.4).abs()).max((v.y + 0.9).abs());
        }
        for _ in 0..n_fields {
            let v = PolyVector::random(&mut rng, 3, *dim);
            let (values, bound, resid) = apply(&v);
            let err = interp::l2_error_vector(&v, regions, &values, &quad).unwrap();
            let grad = {
                let mut acc = 0.0;
                for cell in regions {
                    acc += quad
                        .integrate_cell(cell, |p| v.grad_norm_squared(p))
                        .unwrap();
                }
                acc.sqrt()
            };
            worst_slack = worst_slack.max(err - bound * grad);
            worst_resid = worst_resid.max(resid);
        }
        checks.push(Check::le(
            format!("{label}: error within the bound"),
            worst_slack,
            0.0,
            1e-9,
        ));
        checks.push(Check::le(
            format!("{label}: flux preservation"),
            worst_resid,
            0.0,
            1e-12,
        ));
        checks.push(Check::le(
            format!("{label}: exact on constants"),
            const_err,
            0.0,
            1e-13,
        ));
    }

    CriterionReport::finish(6, "interpolation inequalities", checks, notes, t0)
}

// ---- criterion 7: ordering properties -----------------------------------------------

pub fn criterion_orderings(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x07de);
    let opts = OracleOptions::default();
    let level = cfg.level_2d.saturating_sub(1);

    let mut worst_order = f64::NEG_INFINITY; // mu_cgamma - mu_cp must stay small
    let mut worst_upper = f64::NEG_INFINITY; // oracle - upper
    let mut worst_lower = f64::NEG_INFINITY; // lower - oracle
    for i in 0..20 {
        let cell = if i % 2 == 0 {
            random_triangle(&mut rng)
        } else {
            random_convex_quad(&mut rng)
        };
        let gamma = rng.random_range(0..cell.faces().len());
        let cp = oracle::sharp_cp(&cell, level, &opts).unwrap();
        let cg = oracle::sharp_c_gamma(&cell, &[gamma], level, &opts).unwrap();
        worst_order = worst_order.max(cg.result.eigenvalue - cp.result.eigenvalue);

        let cp_uppers = [
            scalar::cp_upper_classical(&cell).unwrap(),
            scalar::cp_upper_convex(&cell).unwrap(),
        ];
        for u in &cp_uppers {
            worst_upper = worst_upper.max(cp.result.constant - u.value);
        }
        if cell.kind() == crate::geometry::CellKind::Triangle {
            if let Ok(u) = scalar::cp_upper_isosceles(&cell) {
                worst_upper = worst_upper.max(cp.result.constant - u.value);
            }
        }
        let cg_upper = scalar::best_c_gamma_upper(&cell, &[gamma], CpMode::Convex).unwrap();
        worst_upper = worst_upper.max(cg.result.constant - cg_upper.value);
        let cp_lower = scalar::cp_lower_cheng(&cell).unwrap();
        worst_lower = worst_lower.max(cp_lower.value - cp.result.constant);
        let cg_lower = scalar::c_gamma_lower(&cell).unwrap();
        worst_lower = worst_lower.max(cg_lower.value - cg.result.constant);
    }
    checks.push(Check::le(
        "classical eigenvalue above the face eigenvalue (20 random convex cells)",
        worst_order,
        0.0,
        1e-8,
    ));
    checks.push(Check::le(
        "every oracle constant below every applicable upper bound",
        worst_upper,
        0.0,
        1e-10,
    ));
    checks.push(Check::le(
        "every lower bound below the oracle constant",
        worst_lower,
        0.0,
        1e-10,
    ));
    notes.push(format!(
        "worst margins: ordering {worst_order:.3e}, upper {worst_upper:.3e}, lower {worst_lower:.3e}"
    ));
    CriterionReport::finish(7, "ordering properties against the oracle", checks, notes, t0)
}

// ---- criterion 8: operator comparison report ------------------------------------------

pub fn criterion_comparison_report(cfg: &ReproduceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let tri_report = interp::comparison_table(ComparisonCell::Triangle);
    let printed: Vec<&str> = tri_report.rows.iter().map(|r| r.printed.as_str()).collect();
    for want in ["0.4502 h", "0.4929 h", "0.3183 h", "0.3485 h"] {
        checks.push(Check::le(
            format!("triangle report prints {want} verbatim"),
            if printed.contains(&want) { 0.0 } else { 1.0 },
            0.0,
            0.0,
        ));
    }
    checks.push(Check::le(
        "triangle report flags the hypotenuse discrepancy",
        if tri_report.discrepancies.is_empty() { 1.0 } else { 0.0 },
        0.0,
        0.0,
    ));
    let sq_report = interp::comparison_table(ComparisonCell::Square);
    checks.push(Check::le(
        "square report flags the cell-mean constant",
        if sq_report.discrepancies.is_empty() { 1.0 } else { 0.0 },
        0.0,
        0.0,
    ));

    // oracle adjudication of the two flagged entries
    let opts = OracleOptions::default();
    let tri = unit_right_triangle();
    let hyp = oracle::sharp_c_gamma(&tri, &[1], cfg.level_2d, &opts).unwrap();
    let zeta_sqrt2 = 1.0 / (TRIANGLE_LEG_ZETA * 2.0f64.sqrt());
    checks.push(
        Check::rel(
            "hypotenuse adjudication: oracle matches h / (zeta sqrt 2)",
            hyp.result.extrapolated_constant,
            zeta_sqrt2,
            0.01,
        )
        .with_note(format!(
            "oracle {:.6}; catalogue candidate sqrt(2) h / zeta = {:.6} is off by a factor 2",
            hyp.result.extrapolated_constant,
            2.0f64.sqrt() / TRIANGLE_LEG_ZETA
        )),
    );
    let cp = oracle::sharp_cp(&unit_square(), cfg.level_2d, &opts).unwrap();
    checks.push(
        Check::rel(
            "square cell-mean adjudication: oracle matches h / pi",
            cp.result.extrapolated_constant,
            1.0 / PI,
            0.01,
        )
        .with_note("the printed constant pi/h is dimensionally inconsistent".to_string()),
    );

    let elapsed = t0.elapsed().as_secs_f64();
    checks.push(Check::le(
        "report runtime below five minutes",
        elapsed,
        300.0,
        0.0,
    ));
    notes.push(format!("comparison report produced in {elapsed:.1} s"));
    CriterionReport::finish(8, "operator comparison report", checks, notes, t0)
}

/// Run all acceptance criteria.
pub fn run_all(cfg: &ReproduceConfig) -> Reproduction {
    let criteria = vec![
        criterion_table1(cfg),
        criterion_triangle_chain(cfg),
        criterion_tetrahedra(cfg),
        criterion_prism_ratios(cfg),
        criterion_vector_constants(cfg),
        criterion_interpolation(cfg),
        criterion_orderings(cfg),
        criterion_comparison_report(cfg),
    ];
    let passed = criteria.iter().all(|c| c.passed);
    Reproduction { criteria, passed }
}

/// Plain-text rendering of a criterion, one line per check.
pub fn render_criterion(report: &CriterionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "criterion {}: {} [{}] ({} ms)\n",
        report.id,
        report.title,
        if report.passed { "PASS" } else { "FAIL" },
        report.elapsed_ms
    ));
    for c in &report.checks {
        let cmp = match c.mode {
            "le" => format!(
                "{:.6e} <= {:.6e} (+{:.1e})",
                c.measured, c.expected, c.tolerance
            ),
            "rel" => format!(
                "{:.6} vs {:.6} (rel {:.1e})",
                c.measured, c.expected, c.tolerance
            ),
            _ => format!(
                "{:.6} vs {:.6} (abs {:.1e})",
                c.measured, c.expected, c.tolerance
            ),
        };
        out.push_str(&format!(
            "  [{}] {}: {}\n",
            if c.passed { "pass" } else { "FAIL" },
            c.label,
            cmp
        ));
        if let Some(n) = &c.note {
            out.push_str(&format!("        note: {n}\n"));
        }
    }
    for n in &report.notes {
        out.push_str(&format!("  note: {n}\n"));
    }
    out
}

/// Run the suite with defaults.
pub fn run_default() -> Result<Reproduction> {
    Ok(run_all(&ReproduceConfig::default()))
}

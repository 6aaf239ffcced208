//! Ground-truth sharp constants via P1 finite elements: the Poincare-type
//! constants are computed as inverse square roots of smallest constrained
//! eigenvalues of the stiffness/mass pencil on refined simplicial meshes.

mod assemble;
mod eigen;
mod simplicial;
mod sparse;

pub use assemble::{assemble, AssembledSystem};
pub use eigen::{smallest_constrained, EigenOptions, EigenSolution, Pencil};
pub use simplicial::{refine, triangulate, BoundaryFacet, SimplicialMesh};
pub use sparse::{Csr, SpdSolver};

use crate::error::{Error, Result};
use crate::geometry::Cell;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Which constrained eigenvalue problem to solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintSpec {
    /// Zero mean over the cell: the classical constant C_P.
    DomainMean,
    /// Zero mean over the selected faces (their union): C_Gamma.
    FaceMean(Vec<usize>),
    /// Zero mean normal flux through each selected face: the vector constant.
    VectorFlux(Vec<usize>),
}

/// One row of a convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub unknowns: usize,
    pub eigenvalue: f64,
    pub constant: f64,
    /// Relative change of the constant against the previous level.
    pub delta: f64,
}

/// Converged oracle output with convergence metadata.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub constant: f64,
    pub eigenvalue: f64,
    pub level: usize,
    pub unknowns: usize,
    pub residual: f64,
    pub constraint_residual: f64,
    /// Richardson extrapolation from the two finest levels (second order).
    pub extrapolated_constant: f64,
}

/// A full oracle run: per-level rows plus the finest-level result.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRun {
    pub rows: Vec<LevelRow>,
    pub result: OracleResult,
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-10,
            max_iter: 600,
            seed: 7,
        }
    }
}

/// Sharp classical constant C_P by the zero-mean eigenvalue problem.
pub fn sharp_cp(cell: &Cell, max_level: usize, opts: &OracleOptions) -> Result<OracleRun> {
    run_levels(cell, &ConstraintSpec::DomainMean, max_level, opts)
}

/// Sharp boundary constant C_Gamma for the union of the selected faces.
pub fn sharp_c_gamma(
    cell: &Cell,
    gamma: &[usize],
    max_level: usize,
    opts: &OracleOptions,
) -> Result<OracleRun> {
    run_levels(
        cell,
        &ConstraintSpec::FaceMean(gamma.to_vec()),
        max_level,
        opts,
    )
}

/// Sharp trace constant: the boundary mass matrix replaces the domain mass.
pub fn sharp_trace_constant(
    cell: &Cell,
    gamma: &[usize],
    max_level: usize,
    opts: &OracleOptions,
) -> Result<OracleRun> {
    let mut rows = Vec::new();
    let mut last = None;
    let mut mesh = triangulate(cell, 0)?;
    let diam = cell.diameter()?;
    for level in 0..=max_level {
        if level > 0 {
            mesh = refine(&mesh);
        }
        let sys = assemble(&mesh);
        let b = combined_face_mass(&sys, gamma)?;
        let constraint = combined_face_load(&sys, gamma)?;
        let pencil = Pencil::new(&sys.stiffness, &b, 1, 0.5 / diam)?;
        let sol = smallest_constrained(
            &pencil,
            &[constraint],
            &EigenOptions {
                tol: opts.tol,
                max_iter: opts.max_iter,
                seed: opts.seed,
                ..Default::default()
            },
        )?;
        push_row(&mut rows, level, sys.n, &sol);
        last = Some(sol);
    }
    Ok(finish_run(rows, last.expect("at least one level")))
}

/// Sharp vector constant for zero mean normal fluxes through d faces.
pub fn sharp_vector_constant(
    cell: &Cell,
    faces: &[usize],
    max_level: usize,
    opts: &OracleOptions,
) -> Result<OracleRun> {
    run_levels(
        cell,
        &ConstraintSpec::VectorFlux(faces.to_vec()),
        max_level,
        opts,
    )
}

fn run_levels(
    cell: &Cell,
    spec: &ConstraintSpec,
    max_level: usize,
    opts: &OracleOptions,
) -> Result<OracleRun> {
    let mut rows = Vec::new();
    let mut last = None;
    let mut mesh = triangulate(cell, 0)?;
    let diam = cell.diameter()?;
    for level in 0..=max_level {
        if level > 0 {
            mesh = refine(&mesh);
        }
        if mesh.n_vertices() < 3 {
            return Err(Error::PreconditionNotMet(
                "the mesh needs at least 3 vertices".into(),
            ));
        }
        let sys = assemble(&mesh);
        let (blocks, constraints) = build_constraints(cell, &sys, spec)?;
        let pencil = Pencil::new(&sys.stiffness, &sys.mass, blocks, 0.5 / (diam * diam))?;
        let sol = smallest_constrained(
            &pencil,
            &constraints,
            &EigenOptions {
                tol: opts.tol,
                max_iter: opts.max_iter,
                seed: opts.seed,
                ..Default::default()
            },
        )?;
        push_row(&mut rows, level, sys.n * blocks, &sol);
        last = Some(sol);
    }
    Ok(finish_run(rows, last.expect("at least one level")))
}

fn push_row(rows: &mut Vec<LevelRow>, level: usize, unknowns: usize, sol: &EigenSolution) {
    let constant = sol.eigenvalue.max(f64::MIN_POSITIVE).powf(-0.5);
    let delta = rows
        .last()
        .map(|prev: &LevelRow| ((constant - prev.constant) / constant).abs())
        .unwrap_or(f64::NAN);
    rows.push(LevelRow {
        level,
        unknowns,
        eigenvalue: sol.eigenvalue,
        constant,
        delta,
    });
}

fn finish_run(rows: Vec<LevelRow>, last_sol: EigenSolution) -> OracleRun {
    let last = rows.last().expect("at least one level");
    let extrapolated = if rows.len() >= 2 {
        let mu_prev = rows[rows.len() - 2].eigenvalue;
        let mu_ext = (4.0 * last.eigenvalue - mu_prev) / 3.0;
        if mu_ext > 0.0 {
            mu_ext.powf(-0.5)
        } else {
            last.constant
        }
    } else {
        last.constant
    };
    OracleRun {
        result: OracleResult {
            constant: last.constant,
            eigenvalue: last.eigenvalue,
            level: last.level,
            unknowns: last.unknowns,
            residual: last_sol.residual,
            constraint_residual: last_sol.constraint_residual,
            extrapolated_constant: extrapolated,
        },
        rows,
    }
}

/// Build the constraint vectors (and block count) for a spec.
fn build_constraints(
    cell: &Cell,
    sys: &AssembledSystem,
    spec: &ConstraintSpec,
) -> Result<(usize, Vec<Vec<f64>>)> {
    match spec {
        ConstraintSpec::DomainMean => {
            let ones = vec![1.0; sys.n];
            let mut c = vec![0.0; sys.n];
            sys.mass.matvec(&ones, &mut c);
            Ok((1, vec![c]))
        }
        ConstraintSpec::FaceMean(faces) => Ok((1, vec![combined_face_load(sys, faces)?])),
        ConstraintSpec::VectorFlux(faces) => {
            let d = cell.dim();
            if faces.len() != d {
                return Err(Error::InvalidFaceSelection(format!(
                    "vector constraint needs {d} faces, got {}",
                    faces.len()
                )));
            }
            // validated normal system: the d constraints have rank d
            let ns = cell.normal_system(faces)?;
            let mut constraints = Vec::with_capacity(d);
            for (i, &f) in faces.iter().enumerate() {
                if f >= sys.face_load.len() {
                    return Err(Error::InvalidFaceSelection(format!(
                        "face {f} out of range"
                    )));
                }
                let n = ns.normals()[i];
                let mut c = vec![0.0; d * sys.n];
                for j in 0..d {
                    let comp = n[j];
                    if comp == 0.0 {
                        continue;
                    }
                    for (k, &b) in sys.face_load[f].iter().enumerate() {
                        c[j * sys.n + k] = comp * b;
                    }
                }
                constraints.push(c);
            }
            Ok((d, constraints))
        }
    }
}

fn combined_face_load(sys: &AssembledSystem, faces: &[usize]) -> Result<Vec<f64>> {
    if faces.is_empty() {
        return Err(Error::InvalidFaceSelection("empty face selection".into()));
    }
    let mut c = vec![0.0; sys.n];
    for &f in faces {
        if f >= sys.face_load.len() {
            return Err(Error::InvalidFaceSelection(format!("face {f} out of range")));
        }
        for (k, &b) in sys.face_load[f].iter().enumerate() {
            c[k] += b;
        }
    }
    Ok(c)
}

fn combined_face_mass(sys: &AssembledSystem, faces: &[usize]) -> Result<Csr> {
    if faces.is_empty() {
        return Err(Error::InvalidFaceSelection("empty face selection".into()));
    }
    let mut acc = sys.face_mass[faces[0]].clone();
    for &f in &faces[1..] {
        acc = acc.add_scaled(1.0, &sys.face_mass[f], 1.0);
    }
    Ok(acc)
}

/// Result of randomized Rayleigh-quotient sampling.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighSample {
    pub worst_ratio: f64,
    pub oracle_constant: f64,
    pub samples: usize,
}

/// Draw n random P1 fields, project them onto the constraint subspace, and
/// return the largest ratio ||v|| / ||grad v||; it never exceeds the oracle
/// constant. An optional seed vector (e.g. a computed eigenvector) is mixed
/// into the samples.
pub fn rayleigh_sample(
    cell: &Cell,
    spec: &ConstraintSpec,
    level: usize,
    n: usize,
    seed: u64,
    seed_vector: Option<&[f64]>,
) -> Result<RayleighSample> {
    if n < 1 {
        return Err(Error::PreconditionNotMet("need at least one sample".into()));
    }
    let mesh = triangulate(cell, level)?;
    let sys = assemble(&mesh);
    let (blocks, constraints) = build_constraints(cell, &sys, spec)?;
    let total = blocks * sys.n;
    let m = constraints.len();
    let mut gram = nalgebra::DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = constraints[i]
                .iter()
                .zip(&constraints[j])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::SolverNoConvergence("singular constraint Gram matrix".into()))?;
    let project = |u: &mut Vec<f64>| {
        let mut cu = nalgebra::DMatrix::zeros(m, 1);
        for i in 0..m {
            cu[(i, 0)] = constraints[i]
                .iter()
                .zip(u.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        let coef = &gram_inv * cu;
        for (i, c) in constraints.iter().enumerate() {
            let ci = coef[(i, 0)];
            for (uk, ck) in u.iter_mut().zip(c) {
                *uk -= ci * ck;
            }
        }
    };
    let form = |u: &[f64], mat: &Csr| -> f64 {
        (0..blocks)
            .map(|blk| mat.quadratic_form(&u[blk * sys.n..(blk + 1) * sys.n]))
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for s in 0..n {
        let mut u: Vec<f64> = (0..total).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Some(sv) = seed_vector {
            if sv.len() == total {
                let noise = 0.05 / (s as f64 + 1.0);
                for (uk, vk) in u.iter_mut().zip(sv) {
                    *uk = vk + noise * *uk;
                }
            }
        }
        project(&mut u);
        let kq = form(&u, &sys.stiffness);
        let mq = form(&u, &sys.mass);
        if kq > 0.0 {
            worst = worst.max((mq / kq).sqrt());
        }
    }
    // the oracle value on the same mesh bounds every sampled ratio
    let opts = OracleOptions::default();
    let diam = cell.diameter()?;
    let pencil = Pencil::new(&sys.stiffness, &sys.mass, blocks, 0.5 / (diam * diam))?;
    let sol = smallest_constrained(
        &pencil,
        &constraints,
        &EigenOptions {
            tol: opts.tol,
            max_iter: opts.max_iter,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    Ok(RayleighSample {
        worst_ratio: worst,
        oracle_constant: sol.eigenvalue.powf(-0.5),
        samples: n,
    })
}

/// Eigenvector of the finest-level solve of a fresh oracle run, for
/// eigenvector-seeded sampling.
pub fn sharp_c_gamma_with_vector(
    cell: &Cell,
    gamma: &[usize],
    level: usize,
    opts: &OracleOptions,
) -> Result<(OracleRun, Vec<f64>)> {
    let mesh = triangulate(cell, level)?;
    let sys = assemble(&mesh);
    let constraints = vec![combined_face_load(&sys, gamma)?];
    let diam = cell.diameter()?;
    let pencil = Pencil::new(&sys.stiffness, &sys.mass, 1, 0.5 / (diam * diam))?;
    let sol = smallest_constrained(
        &pencil,
        &constraints,
        &EigenOptions {
            tol: opts.tol,
            max_iter: opts.max_iter,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    let mut rows = Vec::new();
    push_row(&mut rows, level, sys.n, &sol);
    let vector = sol.vector.clone();
    Ok((finish_run(rows, sol), vector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point2, point3};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_square() -> Cell {
        Cell::quadrilateral([
            point2(0.0, 0.0),
            point2(1.0, 0.0),
            point2(1.0, 1.0),
            point2(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn cp_of_unit_square_converges_to_inverse_pi() {
        let run = sharp_cp(&unit_square(), 5, &OracleOptions::default()).unwrap();
        assert_relative_eq!(run.result.constant, 1.0 / PI, max_relative = 1e-3);
        assert_relative_eq!(
            run.result.extrapolated_constant,
            1.0 / PI,
            max_relative = 1e-4
        );
        // constants increase with refinement (conforming eigenvalues decrease)
        for w in run.rows.windows(2) {
            assert!(w[1].constant >= w[0].constant - 1e-12);
        }
        assert!(run.result.constraint_residual < 1e-10);
    }

    #[test]
    fn c_gamma_of_unit_square_side() {
        let run = sharp_c_gamma(&unit_square(), &[0], 5, &OracleOptions::default()).unwrap();
        assert_relative_eq!(run.result.constant, 2.0 / PI, max_relative = 2e-3);
        // scaling: the constant scales linearly
        let scaled =
            sharp_c_gamma(&unit_square().scaled(2.0), &[0], 3, &OracleOptions::default())
                .unwrap();
        let base = sharp_c_gamma(&unit_square(), &[0], 3, &OracleOptions::default()).unwrap();
        assert_relative_eq!(
            scaled.result.constant,
            2.0 * base.result.constant,
            max_relative = 1e-10
        );
    }

    #[test]
    fn cp_is_below_c_gamma() {
        let cell = unit_square();
        let cp = sharp_cp(&cell, 4, &OracleOptions::default()).unwrap();
        let cg = sharp_c_gamma(&cell, &[0], 4, &OracleOptions::default()).unwrap();
        assert!(cp.result.eigenvalue >= cg.result.eigenvalue - 1e-8);
    }

    #[test]
    fn trace_constant_scales_as_sqrt() {
        let cell = unit_square();
        let base = sharp_trace_constant(&cell, &[0], 3, &OracleOptions::default()).unwrap();
        let scaled =
            sharp_trace_constant(&cell.scaled(4.0), &[0], 3, &OracleOptions::default()).unwrap();
        assert_relative_eq!(
            scaled.result.constant,
            2.0 * base.result.constant,
            max_relative = 1e-9
        );
        assert!(base.result.constant > 0.0);
        // constants increase toward the limit under refinement
        for w in base.rows.windows(2) {
            assert!(w[1].constant >= w[0].constant - 1e-12);
        }
    }

    #[test]
    fn vector_constant_on_square_is_bounded_by_composition() {
        let cell = unit_square();
        // adjacent sides x2 = 0 (face 0) and x1 = 1 (face 1): orthogonal normals
        let run = sharp_vector_constant(&cell, &[0, 1], 4, &OracleOptions::default()).unwrap();
        assert!(run.result.constant <= 2.0 / PI + 1e-8);
        // frame invariance: rotate the cell
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), 0.7);
        let rotated = cell.transformed(&rot, &crate::geometry::Vector::new(0.3, -0.2, 0.0));
        let run2 =
            sharp_vector_constant(&rotated, &[0, 1], 4, &OracleOptions::default()).unwrap();
        assert_relative_eq!(
            run.result.constant,
            run2.result.constant,
            max_relative = 1e-9
        );
    }

    #[test]
    fn right_tet_base_constant_matches_reference() {
        let tet = Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(0.0, 1.0, 0.0),
            point3(0.0, 0.0, 1.0),
        ])
        .unwrap();
        // the base {x3 = 0} holds vertices {0,1,2}: face 3 in the opposite-vertex ordering
        let run = sharp_c_gamma(&tet, &[3], 4, &OracleOptions::default()).unwrap();
        assert_relative_eq!(run.result.extrapolated_constant, 0.3756, max_relative = 1e-2);
    }

    #[test]
    fn rayleigh_sampling_stays_below_oracle() {
        let cell = unit_square();
        let spec = ConstraintSpec::FaceMean(vec![0]);
        let sample = rayleigh_sample(&cell, &spec, 3, 40, 11, None).unwrap();
        assert!(sample.worst_ratio <= sample.oracle_constant + 1e-10);
        // eigenvector-seeded sampling approaches the constant
        let (run, vector) =
            sharp_c_gamma_with_vector(&cell, &[0], 3, &OracleOptions::default()).unwrap();
        let seeded = rayleigh_sample(&cell, &spec, 3, 10, 11, Some(&vector)).unwrap();
        assert!(seeded.worst_ratio <= seeded.oracle_constant + 1e-10);
        assert!(
            seeded.worst_ratio >= 0.99 * run.result.constant,
            "seeded ratio {} vs constant {}",
            seeded.worst_ratio,
            run.result.constant
        );
    }
}

//! Normal systems and the T matrix controlling vector constants.

use super::{Vector, DET_TOL};
use crate::error::{Error, Result};
use nalgebra::Matrix3;

/// d unit (or mean) normals forming the rows of the matrix N.
#[derive(Debug, Clone)]
pub struct NormalSystem {
    dim: usize,
    normals: Vec<Vector>,
    det: f64,
}

impl NormalSystem {
    /// Build a system from d normals; fails when |det N| falls below the
    /// validity tolerance (dependent normals).
    pub fn new(dim: usize, normals: Vec<Vector>) -> Result<Self> {
        if normals.len() != dim {
            return Err(Error::InvalidFaceSelection(format!(
                "normal system needs {dim} normals, got {}",
                normals.len()
            )));
        }
        let det = match dim {
            2 => normals[0].x * normals[1].y - normals[0].y * normals[1].x,
            3 => normals[0].dot(&normals[1].cross(&normals[2])),
            _ => {
                return Err(Error::InvalidGeometry(format!(
                    "unsupported dimension {dim}"
                )))
            }
        };
        let sys = NormalSystem { dim, normals, det };
        if !sys.is_valid() {
            return Err(Error::DependentNormals {
                det,
                tol: DET_TOL,
            });
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn is_valid(&self) -> bool {
        self.det.abs() > DET_TOL
    }

    /// Angle between the two normals (2D systems only).
    pub fn angle_2d(&self) -> f64 {
        let c = self.normals[0]
            .dot(&self.normals[1])
            .clamp(-1.0, 1.0);
        c.acos()
    }

    /// Solve N c = r for the interpolant coefficients.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vector> {
        debug_assert_eq!(rhs.len(), self.dim);
        match self.dim {
            2 => {
                let n0 = &self.normals[0];
                let n1 = &self.normals[1];
                let det = self.det;
                let x = (rhs[0] * n1.y - rhs[1] * n0.y) / det;
                let y = (n0.x * rhs[1] - n1.x * rhs[0]) / det;
                Ok(Vector::new(x, y, 0.0))
            }
            3 => {
                let m = Matrix3::from_rows(&[
                    self.normals[0].transpose(),
                    self.normals[1].transpose(),
                    self.normals[2].transpose(),
                ]);
                let rhs = Vector::new(rhs[0], rhs[1], rhs[2]);
                m.lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::DependentNormals {
                        det: self.det,
                        tol: DET_TOL,
                    })
            }
            _ => unreachable!(),
        }
    }
}

/// T = sum of n (x) n over the system's normals, with its smallest eigenvalue.
#[derive(Debug, Clone)]
pub struct TMatrix {
    dim: usize,
    entries: Matrix3<f64>,
    lambda_min: f64,
}

impl TMatrix {
    /// Assemble T and compute its smallest eigenvalue: closed form in 2D,
    /// cyclic Jacobi rotations in 3D.
    pub fn from_normal_system(ns: &NormalSystem) -> TMatrix {
        let mut t = Matrix3::zeros();
        for n in ns.normals() {
            t += n * n.transpose();
        }
        let lambda_min = match ns.dim() {
            2 => {
                // eigenvalues of the 2x2 block: tr/2 -+ sqrt((tr/2)^2 - det(N)^2),
                // which reduces to 1 -+ sqrt(1 - det^2) for unit normals
                let tr = t[(0, 0)] + t[(1, 1)];
                let half = tr / 2.0;
                let disc = (half * half - ns.det() * ns.det()).max(0.0);
                half - disc.sqrt()
            }
            _ => jacobi_smallest_eigenvalue(&t, 3),
        };
        TMatrix {
            dim: ns.dim(),
            entries: t,
            lambda_min,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &Matrix3<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Smallest eigenvalue by the iterative path, for cross-checking the
    /// closed form in 2D.
    pub fn lambda_min_iterative(&self) -> f64 {
        jacobi_smallest_eigenvalue(&self.entries, self.dim)
    }
}

/// Smallest eigenvalue of a symmetric dxd matrix (d <= 3) by cyclic Jacobi
/// rotations, iterated until the off-diagonal mass falls below 1e-12.
pub fn jacobi_smallest_eigenvalue(m: &Matrix3<f64>, dim: usize) -> f64 {
    let mut a = *m;
    let scale = (0..dim)
        .map(|i| a[(i, i)].abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for _ in 0..64 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in p + 1..dim {
                off += a[(p, q)].abs();
            }
        }
        if off <= 1e-12 * scale {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[(p, q)].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (app, aqq, apq) = (a[(p, p)], a[(q, q)], a[(p, q)]);
                a[(p, p)] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[(q, q)] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..dim {
                    if r != p && r != q {
                        let (arp, arq) = (a[(r, p)], a[(r, q)]);
                        a[(r, p)] = c * arp - s * arq;
                        a[(p, r)] = a[(r, p)];
                        a[(r, q)] = s * arp + c * arq;
                        a[(q, r)] = a[(r, q)];
                    }
                }
            }
        }
    }
    (0..dim).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min)
}

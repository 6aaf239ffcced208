//! Field samplers: evaluation interfaces for scalar and vector fields plus
//! the registry of built-in analytic test fields used by the CLI.

use crate::error::{Error, Result};
use crate::geometry::{Point, Vector};
use nalgebra::Matrix3;
use std::f64::consts::PI;
use std::sync::Arc;

/// Point-to-scalar evaluation on the closed cell.
pub trait ScalarField {
    fn eval(&self, p: &Point) -> f64;
}

/// Point-to-vector evaluation on the closed cell.
pub trait VectorField {
    fn eval(&self, p: &Point) -> Vector;
}

impl<F: Fn(&Point) -> f64> ScalarField for F {
    fn eval(&self, p: &Point) -> f64 {
        self(p)
    }
}

impl<F: Fn(&Point) -> Vector> VectorField for F {
    fn eval(&self, p: &Point) -> Vector {
        self(p)
    }
}

type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Point) -> Vector + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&Point) -> Matrix3<f64> + Send + Sync>;

/// A scalar field with an analytic gradient, as registered fields provide.
#[derive(Clone)]
pub struct AnalyticScalar {
    pub name: String,
    f: ScalarFn,
    grad: VectorFn,
}

impl AnalyticScalar {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point) -> Vector + Send + Sync + 'static,
    ) -> Self {
        AnalyticScalar {
            name: name.into(),
            f: Arc::new(f),
            grad: Arc::new(grad),
        }
    }

    pub fn gradient(&self, p: &Point) -> Vector {
        (self.grad)(p)
    }
}

impl ScalarField for AnalyticScalar {
    fn eval(&self, p: &Point) -> f64 {
        (self.f)(p)
    }
}

/// A vector field with an analytic Jacobian (rows are component gradients).
#[derive(Clone)]
pub struct AnalyticVector {
    pub name: String,
    f: VectorFn,
    jacobian: MatrixFn,
}

impl AnalyticVector {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Point) -> Vector + Send + Sync + 'static,
        jacobian: impl Fn(&Point) -> Matrix3<f64> + Send + Sync + 'static,
    ) -> Self {
        AnalyticVector {
            name: name.into(),
            f: Arc::new(f),
            jacobian: Arc::new(jacobian),
        }
    }

    /// Squared Frobenius norm of the Jacobian at p, the |grad v|^2 density.
    pub fn grad_norm_squared(&self, p: &Point) -> f64 {
        (self.jacobian)(p).norm_squared()
    }
}

impl VectorField for AnalyticVector {
    fn eval(&self, p: &Point) -> Vector {
        (self.f)(p)
    }
}

/// A polynomial in x1, x2, x3 stored as monomial terms.
#[derive(Debug, Clone, Default)]
pub struct Polynomial {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Polynomial {
    pub fn eval(&self, p: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c * p.x.powi(e[0] as i32) * p.y.powi(e[1] as i32) * p.z.powi(e[2] as i32)
            })
            .sum()
    }

    pub fn gradient(&self, p: &Point) -> Vector {
        let mut g = Vector::zeros();
        for (c, e) in &self.terms {
            let coords = [p.x, p.y, p.z];
            for axis in 0..3 {
                if e[axis] == 0 {
                    continue;
                }
                let mut term = c * e[axis] as f64;
                for (k, &x) in coords.iter().enumerate() {
                    let pow = if k == axis { e[k] - 1 } else { e[k] };
                    term *= x.powi(pow as i32);
                }
                g[axis] += term;
            }
        }
        g
    }

    /// Random polynomial with total degree at most `degree` in the first
    /// `dim` coordinates, coefficients in [-1, 1].
    pub fn random<R: rand::Rng>(rng: &mut R, degree: u32, dim: usize) -> Polynomial {
        let mut terms = Vec::new();
        for i in 0..=degree {
            for j in 0..=(degree - i) {
                for k in 0..=(degree - i - j) {
                    if dim == 2 && k > 0 {
                        continue;
                    }
                    terms.push((rng.random_range(-1.0..1.0), [i, j, k]));
                }
            }
        }
        Polynomial { terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, e)| e[0] + e[1] + e[2])
            .max()
            .unwrap_or(0)
    }

    pub fn into_analytic(self, name: impl Into<String>) -> AnalyticScalar {
        let p2 = self.clone();
        AnalyticScalar::new(name, move |p| self.eval(p), move |p| p2.gradient(p))
    }
}

/// A polynomial vector field with one polynomial per component.
#[derive(Debug, Clone, Default)]
pub struct PolyVector {
    pub components: [Polynomial; 3],
}

impl PolyVector {
    pub fn random<R: rand::Rng>(rng: &mut R, degree: u32, dim: usize) -> PolyVector {
        let zero = Polynomial::default();
        let mut components = [zero.clone(), zero.clone(), zero];
        for c in components.iter_mut().take(dim) {
            *c = Polynomial::random(rng, degree, dim);
        }
        PolyVector { components }
    }

    pub fn grad_norm_squared(&self, p: &Point) -> f64 {
        self.components
            .iter()
            .map(|c| c.gradient(p).norm_squared())
            .sum()
    }

    pub fn into_analytic(self, name: impl Into<String>) -> AnalyticVector {
        let f = self.clone();
        let g = self;
        AnalyticVector::new(
            name,
            move |p| {
                Vector::new(
                    f.components[0].eval(p),
                    f.components[1].eval(p),
                    f.components[2].eval(p),
                )
            },
            move |p| {
                Matrix3::from_rows(&[
                    g.components[0].gradient(p).transpose(),
                    g.components[1].gradient(p).transpose(),
                    g.components[2].gradient(p).transpose(),
                ])
            },
        )
    }
}

impl VectorField for PolyVector {
    fn eval(&self, p: &Point) -> Vector {
        Vector::new(
            self.components[0].eval(p),
            self.components[1].eval(p),
            self.components[2].eval(p),
        )
    }
}

/// Names of the built-in scalar fields, for help output.
pub const SCALAR_FIELD_NAMES: &[&str] = &[
    "one",
    "x1",
    "x2",
    "x3",
    "<monomial products up to degree 3, e.g. x1^2*x2>",
    "const:<value>",
    "sin_pi_x1",
    "sin_pi_x1_sin_pi_x2",
    "cos_pi_x1_cos_pi_x2",
];

/// Names of the built-in vector fields.
pub const VECTOR_FIELD_NAMES: &[&str] = &[
    "const:<v1>,<v2>[,<v3>]",
    "linear",
    "swap",
    "rot90",
    "grad_sin_sin",
];

/// Look up or parse a scalar field by identifier.
pub fn scalar_field(name: &str) -> Result<AnalyticScalar> {
    match name {
        "one" => {
            return Ok(AnalyticScalar::new("one", |_| 1.0, |_| Vector::zeros()));
        }
        "sin_pi_x1" => {
            return Ok(AnalyticScalar::new(
                name,
                |p| (PI * p.x).sin(),
                |p| Vector::new(PI * (PI * p.x).cos(), 0.0, 0.0),
            ));
        }
        "sin_pi_x1_sin_pi_x2" => {
            return Ok(AnalyticScalar::new(
                name,
                |p| (PI * p.x).sin() * (PI * p.y).sin(),
                |p| {
                    Vector::new(
                        PI * (PI * p.x).cos() * (PI * p.y).sin(),
                        PI * (PI * p.x).sin() * (PI * p.y).cos(),
                        0.0,
                    )
                },
            ));
        }
        "cos_pi_x1_cos_pi_x2" => {
            return Ok(AnalyticScalar::new(
                name,
                |p| (PI * p.x).cos() * (PI * p.y).cos(),
                |p| {
                    Vector::new(
                        -PI * (PI * p.x).sin() * (PI * p.y).cos(),
                        -PI * (PI * p.x).cos() * (PI * p.y).sin(),
                        0.0,
                    )
                },
            ));
        }
        _ => {}
    }
    if let Some(value) = name.strip_prefix("const:") {
        let v: f64 = value
            .parse()
            .map_err(|_| Error::UnknownField(name.to_string()))?;
        return Ok(AnalyticScalar::new(name, move |_| v, |_| Vector::zeros()));
    }
    parse_monomial(name).map(|poly| poly.into_analytic(name))
}

/// Parse monomial products like "x1^2*x2" (total degree at most 3).
fn parse_monomial(name: &str) -> Result<Polynomial> {
    let mut exps = [0u32; 3];
    for factor in name.split('*') {
        let (var, pow) = match factor.split_once('^') {
            Some((v, p)) => (
                v,
                p.parse::<u32>()
                    .map_err(|_| Error::UnknownField(name.to_string()))?,
            ),
            None => (factor, 1),
        };
        let axis = match var.trim() {
            "x1" => 0,
            "x2" => 1,
            "x3" => 2,
            _ => return Err(Error::UnknownField(name.to_string())),
        };
        exps[axis] += pow;
    }
    if exps.iter().sum::<u32>() > 3 {
        return Err(Error::UnknownField(format!(
            "{name}: monomials are limited to total degree 3"
        )));
    }
    Ok(Polynomial {
        terms: vec![(1.0, exps)],
    })
}

/// Look up or parse a vector field by identifier.
pub fn vector_field(name: &str) -> Result<AnalyticVector> {
    match name {
        // identity field (x1, x2, x3)
        "linear" => {
            return Ok(AnalyticVector::new(
                name,
                |p| Vector::new(p.x, p.y, p.z),
                |_| Matrix3::identity(),
            ));
        }
        // the gradient of x1 x2: (x2, x1)
        "swap" => {
            return Ok(AnalyticVector::new(
                name,
                |p| Vector::new(p.y, p.x, 0.0),
                |_| {
                    Matrix3::new(
                        0.0, 1.0, 0.0, //
                        1.0, 0.0, 0.0, //
                        0.0, 0.0, 0.0,
                    )
                },
            ));
        }
        "rot90" => {
            return Ok(AnalyticVector::new(
                name,
                |p| Vector::new(-p.y, p.x, 0.0),
                |_| {
                    Matrix3::new(
                        0.0, -1.0, 0.0, //
                        1.0, 0.0, 0.0, //
                        0.0, 0.0, 0.0,
                    )
                },
            ));
        }
        "grad_sin_sin" => {
            return Ok(AnalyticVector::new(
                name,
                |p| {
                    Vector::new(
                        PI * (PI * p.x).cos() * (PI * p.y).sin(),
                        PI * (PI * p.x).sin() * (PI * p.y).cos(),
                        0.0,
                    )
                },
                |p| {
                    let pp = PI * PI;
                    let (sx, cx) = (PI * p.x).sin_cos();
                    let (sy, cy) = (PI * p.y).sin_cos();
                    Matrix3::new(
                        -pp * sx * sy,
                        pp * cx * cy,
                        0.0,
                        pp * cx * cy,
                        -pp * sx * sy,
                        0.0,
                        0.0,
                        0.0,
                        0.0,
                    )
                },
            ));
        }
        _ => {}
    }
    if let Some(rest) = name.strip_prefix("const:") {
        let parts: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnknownField(name.to_string()))?;
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::UnknownField(name.to_string()));
        }
        let v = Vector::new(parts[0], parts[1], *parts.get(2).unwrap_or(&0.0));
        return Ok(AnalyticVector::new(name, move |_| v, |_| Matrix3::zeros()));
    }
    Err(Error::UnknownField(name.to_string()))
}

//! Quadrature rules on segments, triangles, and tetrahedra.
//!
//! Rules live on reference elements and are mapped affinely. Weights are
//! positive and sum to the reference measure (1 for the unit segment, 1/2 for
//! the unit triangle, 1/6 for the unit tetrahedron); each rule records the
//! polynomial degree it integrates exactly.

use nalgebra::{Point3, Vector3};

/// Gauss-Legendre nodes and weights on [0, 1].
#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl SegmentRule {
    /// n-point Gauss-Legendre rule, exact for degree 2n - 1.
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1);
        let (nodes, weights) = gauss_legendre_01(n);
        SegmentRule {
            nodes,
            weights,
            degree: 2 * n - 1,
        }
    }

    /// Default rule: 4 points, degree 7.
    pub fn default_rule() -> Self {
        Self::gauss(4)
    }

    /// Integrate `f` along the physical segment from `a` to `b`.
    pub fn integrate<F: FnMut(&Point3<f64>) -> f64>(
        &self,
        a: &Point3<f64>,
        b: &Point3<f64>,
        mut f: F,
    ) -> f64 {
        let dir = b - a;
        let len = dir.norm();
        let mut acc = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let p = a + dir * *t;
            acc += w * f(&p);
        }
        acc * len
    }
}

/// Rule on the reference triangle (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Symmetric 12-point rule, exact for degree 6.
    pub fn symmetric6() -> Self {
        let mut points = Vec::with_capacity(12);
        let mut weights = Vec::with_capacity(12);
        let mut orbit3 = |a: f64, w: f64| {
            let c = 1.0 - 2.0 * a;
            for bary in [[a, a, c], [a, c, a], [c, a, a]] {
                points.push([bary[1], bary[2]]);
                weights.push(w / 2.0);
            }
        };
        orbit3(0.249286745170910, 0.116786275726379);
        orbit3(0.063089014491502, 0.050844906370207);
        let (a, b, w) = (0.053145049844816, 0.310352451033785, 0.082851075618374);
        let c = 1.0 - a - b;
        for bary in [
            [a, b, c],
            [a, c, b],
            [b, a, c],
            [b, c, a],
            [c, a, b],
            [c, b, a],
        ] {
            points.push([bary[1], bary[2]]);
            weights.push(w / 2.0);
        }
        TriangleRule {
            points,
            weights,
            degree: 6,
        }
    }

    /// Collapsed-square Gauss product with n^2 points, exact for degree 2n - 2.
    pub fn collapsed(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre_01(n);
        let mut points = Vec::with_capacity(n * n);
        let mut ws = Vec::with_capacity(n * n);
        for (u, wu) in nodes.iter().zip(&weights) {
            for (v, wv) in nodes.iter().zip(&weights) {
                // x = u(1-v), y = v, Jacobian (1-v)
                points.push([u * (1.0 - v), *v]);
                ws.push(wu * wv * (1.0 - v));
            }
        }
        TriangleRule {
            points,
            weights: ws,
            degree: 2 * n - 2,
        }
    }

    pub fn default_rule() -> Self {
        Self::symmetric6()
    }

    /// Rule of at least the requested degree.
    pub fn with_degree(degree: usize) -> Self {
        if degree <= 6 {
            Self::symmetric6()
        } else {
            Self::collapsed(degree / 2 + 1)
        }
    }

    /// Integrate `f` over the physical triangle (p0, p1, p2).
    pub fn integrate<F: FnMut(&Point3<f64>) -> f64>(
        &self,
        p0: &Point3<f64>,
        p1: &Point3<f64>,
        p2: &Point3<f64>,
        mut f: F,
    ) -> f64 {
        let e1 = p1 - p0;
        let e2 = p2 - p0;
        let area2 = e1.cross(&e2).norm();
        let mut acc = 0.0;
        for (xy, w) in self.points.iter().zip(&self.weights) {
            let p = p0 + e1 * xy[0] + e2 * xy[1];
            acc += w * f(&p);
        }
        acc * area2
    }
}

/// Rule on the reference tetrahedron (0,0,0), e1, e2, e3.
#[derive(Debug, Clone)]
pub struct TetRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TetRule {
    /// Collapsed-cube Gauss product with n^3 points, exact for degree 2n - 3.
    pub fn collapsed(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre_01(n);
        let m = n * n * n;
        let mut points = Vec::with_capacity(m);
        let mut ws = Vec::with_capacity(m);
        for (u, wu) in nodes.iter().zip(&weights) {
            for (v, wv) in nodes.iter().zip(&weights) {
                for (w, ww) in nodes.iter().zip(&weights) {
                    // x = u(1-v)(1-w), y = v(1-w), z = w, Jacobian (1-v)(1-w)^2
                    let jac = (1.0 - v) * (1.0 - w) * (1.0 - w);
                    points.push([u * (1.0 - v) * (1.0 - w), v * (1.0 - w), *w]);
                    ws.push(wu * wv * ww * jac);
                }
            }
        }
        TetRule {
            points,
            weights: ws,
            degree: 2 * n - 3,
        }
    }

    /// Default rule: degree 7 (125 points).
    pub fn default_rule() -> Self {
        Self::collapsed(5)
    }

    pub fn with_degree(degree: usize) -> Self {
        Self::collapsed(degree / 2 + 2)
    }

    /// Integrate `f` over the physical tetrahedron (p0..p3).
    pub fn integrate<F: FnMut(&Point3<f64>) -> f64>(
        &self,
        p0: &Point3<f64>,
        p1: &Point3<f64>,
        p2: &Point3<f64>,
        p3: &Point3<f64>,
        mut f: F,
    ) -> f64 {
        let e1 = p1 - p0;
        let e2 = p2 - p0;
        let e3 = p3 - p0;
        let jac6 = e1.cross(&e2).dot(&e3).abs();
        let mut acc = 0.0;
        for (xyz, w) in self.points.iter().zip(&self.weights) {
            let p = p0 + e1 * xyz[0] + e2 * xyz[1] + e3 * xyz[2];
            acc += w * f(&p);
        }
        acc * jac6
    }
}

/// Gauss-Legendre nodes and weights on [0, 1], computed by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess on [-1, 1].
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Unit vector pair spanning directions used in tests.
#[allow(dead_code)]
pub(crate) fn origin() -> Point3<f64> {
    Point3::origin()
}

#[allow(dead_code)]
pub(crate) fn vec3(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact integral of x^a y^b over the unit triangle.
    fn tri_monomial(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    /// Exact integral of x^a y^b z^c over the unit tetrahedron.
    fn tet_monomial(a: usize, b: usize, c: usize) -> f64 {
        factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
    }

    #[test]
    fn gauss_segment_is_exact_to_declared_degree() {
        for n in 1..=8 {
            let rule = SegmentRule::gauss(n);
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for d in 0..=rule.degree {
                let exact = 1.0 / (d as f64 + 1.0);
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(t, w)| w * t.powi(d as i32))
                    .sum();
                assert!(
                    (got - exact).abs() < 1e-13,
                    "n={n} degree={d}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn triangle_rules_match_monomial_integrals() {
        for rule in [
            TriangleRule::symmetric6(),
            TriangleRule::collapsed(4),
            TriangleRule::collapsed(6),
        ] {
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-13);
            assert!(rule.weights.iter().all(|w| *w > 0.0));
            for a in 0..=rule.degree {
                for b in 0..=(rule.degree - a) {
                    let got: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = tri_monomial(a, b);
                    assert!(
                        (got - exact).abs() < 1e-13,
                        "deg {} x^{a} y^{b}: {got} vs {exact}",
                        rule.degree
                    );
                }
            }
        }
    }

    #[test]
    fn tet_rule_matches_monomial_integrals() {
        let rule = TetRule::collapsed(5);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0 / 6.0).abs() < 1e-13);
        assert!(rule.weights.iter().all(|w| *w > 0.0));
        for a in 0..=rule.degree {
            for b in 0..=(rule.degree - a) {
                for c in 0..=(rule.degree - a - b) {
                    let got: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| {
                            w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32)
                        })
                        .sum();
                    let exact = tet_monomial(a, b, c);
                    assert!(
                        (got - exact).abs() < 1e-13,
                        "x^{a} y^{b} z^{c}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn physical_mapping_scales_correctly() {
        let rule = TriangleRule::default_rule();
        let p0 = Point3::new(1.0, 1.0, 0.0);
        let p1 = Point3::new(3.0, 1.0, 0.0);
        let p2 = Point3::new(1.0, 4.0, 0.0);
        let area = rule.integrate(&p0, &p1, &p2, |_| 1.0);
        assert!((area - 3.0).abs() < 1e-13);
        // integral of x over the triangle = area * centroid_x
        let ix = rule.integrate(&p0, &p1, &p2, |p| p.x);
        assert!((ix - 3.0 * (5.0 / 3.0)).abs() < 1e-12);
    }
}

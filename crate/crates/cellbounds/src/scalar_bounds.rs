//! Closed-form upper/lower bounds and exact values for the scalar constants
//! C_P and C_Gamma of mesh cells.
//!
//! Upper bounds come from flux-field majorants evaluated with exact affine
//! integration; exact values from a catalogue of rectangles, boxes, and right
//! isosceles triangles; the lower bound from the Bessel-root estimate of the
//! classical constant combined with C_P <= C_Gamma.

use crate::error::{Error, Result};
use crate::geometry::{Cell, CellKind, Point, Vector, GEOMETRY_TOL};
use serde::Serialize;
use std::f64::consts::PI;

/// Smallest positive root of the Bessel function J0.
pub const BESSEL_J0_FIRST_ROOT: f64 = 2.404825557695773;
/// Smallest positive root of the Bessel function J1.
pub const BESSEL_J1_FIRST_ROOT: f64 = 3.831705970207512;
/// Denominator of the sharp leg constant of the right isosceles triangle,
/// known to six significant digits; comparisons against catalogue values use
/// a 1e-4 relative tolerance accordingly.
pub const TRIANGLE_LEG_ZETA: f64 = 2.02876;

/// Which formula produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Formula {
    CpClassical,
    CpConvex,
    CpLowerBessel,
    CpIsosceles,
    ExactRectangleFace,
    ExactRectangleBoundary,
    ExactBoxFace,
    ExactTriangleLeg,
    ExactTriangleTwoLegs,
    ExactTriangleHypotenuse,
    FluxMajorant,
    TriangleMajorant,
    QuadrilateralMajorant,
    TetrahedronMajorant,
    PyramidMajorant,
    PrismMajorant,
    PrismConstantHeight,
    CGammaLowerBessel,
    MacrocellMax,
    UserSupplied,
}

impl Formula {
    pub fn label(&self) -> &'static str {
        match self {
            Formula::CpClassical => "classical diameter bound",
            Formula::CpConvex => "convex diameter/pi bound",
            Formula::CpLowerBessel => "Bessel-root lower bound",
            Formula::CpIsosceles => "isosceles triangle bound",
            Formula::ExactRectangleFace => "exact: rectangle, one side",
            Formula::ExactRectangleBoundary => "exact: rectangle, full boundary",
            Formula::ExactBoxFace => "exact: box, one face",
            Formula::ExactTriangleLeg => "exact: right isosceles triangle, leg",
            Formula::ExactTriangleTwoLegs => "exact: right isosceles triangle, two legs",
            Formula::ExactTriangleHypotenuse => "exact: right isosceles triangle, hypotenuse",
            Formula::FluxMajorant => "flux-field majorant",
            Formula::TriangleMajorant => "triangle majorant",
            Formula::QuadrilateralMajorant => "quadrilateral split majorant",
            Formula::TetrahedronMajorant => "tetrahedron majorant",
            Formula::PyramidMajorant => "pyramid split majorant",
            Formula::PrismMajorant => "prism height majorant",
            Formula::PrismConstantHeight => "prism constant-height majorant",
            Formula::CGammaLowerBessel => "Bessel-root lower bound (any face)",
            Formula::MacrocellMax => "macrocell maximum",
            Formula::UserSupplied => "user-supplied",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    Upper,
    Lower,
    Exact,
}

/// A named precondition and whether the cell satisfied it.
#[derive(Debug, Clone, Serialize)]
pub struct Precondition {
    pub name: &'static str,
    pub met: bool,
}

/// A constant bound with units of length and its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantBound {
    pub value: f64,
    pub kind: BoundKind,
    pub formula: Formula,
    pub preconditions: Vec<Precondition>,
}

impl ConstantBound {
    fn new(value: f64, kind: BoundKind, formula: Formula) -> Self {
        ConstantBound {
            value,
            kind,
            formula,
            preconditions: vec![],
        }
    }

    fn with_precondition(mut self, name: &'static str, met: bool) -> Self {
        self.preconditions.push(Precondition { name, met });
        self
    }

    /// An upper bound supplied by the caller.
    pub fn user_supplied(value: f64) -> Self {
        ConstantBound::new(value, BoundKind::Upper, Formula::UserSupplied)
    }

    /// Maximum of child constants for a macrocell.
    pub fn macrocell_max(children: &[ConstantBound]) -> Result<ConstantBound> {
        if children.is_empty() {
            return Err(Error::PreconditionNotMet(
                "macrocell maximum needs at least one child constant".into(),
            ));
        }
        let value = children.iter().map(|c| c.value).fold(0.0, f64::max);
        let kind = if children.iter().all(|c| c.kind != BoundKind::Lower) {
            BoundKind::Upper
        } else {
            return Err(Error::PreconditionNotMet(
                "macrocell maximum composes upper bounds".into(),
            ));
        };
        Ok(ConstantBound::new(value, kind, Formula::MacrocellMax))
    }
}

/// Selects which C_P upper bound feeds composite formulas.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CpMode {
    /// Diameter/pi bound; requires convexity.
    #[default]
    Convex,
    /// Classical diameter bound.
    Classical,
    /// Caller-provided upper bound for C_P of the whole cell.
    Value(f64),
}

// ---- C_P bounds ----------------------------------------------------------

/// Classical diameter bounds: (3/4) d for d = 3, sqrt(7/24) d for d = 2.
pub fn cp_upper_classical(cell: &Cell) -> Result<ConstantBound> {
    let d = cell.diameter()?;
    let value = match cell.dim() {
        2 => (7.0f64 / 24.0).sqrt() * d,
        _ => 0.75 * d,
    };
    Ok(ConstantBound::new(
        value,
        BoundKind::Upper,
        Formula::CpClassical,
    ))
}

/// Diameter/pi bound, valid for convex cells.
pub fn cp_upper_convex(cell: &Cell) -> Result<ConstantBound> {
    if !cell.is_convex()? {
        return Err(Error::PreconditionNotMet(
            "the diameter/pi bound requires a convex cell".into(),
        ));
    }
    let d = cell.diameter()?;
    Ok(
        ConstantBound::new(d / PI, BoundKind::Upper, Formula::CpConvex)
            .with_precondition("convex", true),
    )
}

/// Lower bound d / (2 j_{0,1}) for planar cells.
pub fn cp_lower_cheng(cell: &Cell) -> Result<ConstantBound> {
    if cell.dim() != 2 {
        return Err(Error::PreconditionNotMet(
            "the Bessel-root lower bound is stated for d = 2".into(),
        ));
    }
    let d = cell.diameter()?;
    Ok(ConstantBound::new(
        d / (2.0 * BESSEL_J0_FIRST_ROOT),
        BoundKind::Lower,
        Formula::CpLowerBessel,
    ))
}

/// Improved upper bound d / j_{1,1} for isosceles triangles.
pub fn cp_upper_isosceles(cell: &Cell) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Triangle || !cell.is_isosceles()? {
        return Err(Error::PreconditionNotMet(
            "the Bessel-root upper bound requires an isosceles triangle".into(),
        ));
    }
    let d = cell.diameter()?;
    Ok(ConstantBound::new(
        d / BESSEL_J1_FIRST_ROOT,
        BoundKind::Upper,
        Formula::CpIsosceles,
    )
    .with_precondition("isosceles", true))
}

/// C_P upper bound according to the requested mode.
pub fn cp_upper(cell: &Cell, mode: CpMode) -> Result<ConstantBound> {
    match mode {
        CpMode::Convex => cp_upper_convex(cell),
        CpMode::Classical => cp_upper_classical(cell),
        CpMode::Value(v) => {
            if !(v > 0.0) {
                return Err(Error::PreconditionNotMet(
                    "user-supplied C_P bound must be positive".into(),
                ));
            }
            Ok(ConstantBound::user_supplied(v))
        }
    }
}

// ---- exact catalogue -------------------------------------------------------

/// Exact constants for rectangles, boxes, and right isosceles triangles,
/// matched after rigid-motion normalization. Returns `None` when the
/// cell/face combination is not in the catalogue.
pub fn exact_table1(cell: &Cell, gamma: &[usize]) -> Result<Option<ConstantBound>> {
    if gamma.is_empty() {
        return Err(Error::InvalidFaceSelection("empty face selection".into()));
    }
    for &g in gamma {
        cell.face(g)?;
    }
    let scale = cell.diameter()?;
    let tol = 1e-9 * scale;

    if let Some((h1, h2)) = rectangle_sides(cell, tol)? {
        if gamma.len() == 1 {
            let g = gamma[0];
            let along = cell.face_measure(g)?;
            let perp = if (along - h1).abs() <= tol { h2 } else { h1 };
            let value = (2.0 * perp).max(along) / PI;
            return Ok(Some(ConstantBound::new(
                value,
                BoundKind::Exact,
                Formula::ExactRectangleFace,
            )));
        }
        if gamma.len() == cell.faces().len() && all_distinct(gamma) {
            let value = h1.max(h2) / PI;
            return Ok(Some(ConstantBound::new(
                value,
                BoundKind::Exact,
                Formula::ExactRectangleBoundary,
            )));
        }
        return Ok(None);
    }

    if let Some(b) = box_match(cell, gamma, tol)? {
        return Ok(Some(b));
    }

    if let Some(leg) = right_isosceles_leg(cell, tol)? {
        let is_leg =
            |g: usize| -> Result<bool> { Ok((cell.face_measure(g)? - leg).abs() <= 10.0 * tol) };
        if gamma.len() == 1 {
            let g = gamma[0];
            if is_leg(g)? {
                return Ok(Some(ConstantBound::new(
                    leg / TRIANGLE_LEG_ZETA,
                    BoundKind::Exact,
                    Formula::ExactTriangleLeg,
                )));
            }
            return Ok(Some(ConstantBound::new(
                2.0f64.sqrt() * leg / TRIANGLE_LEG_ZETA,
                BoundKind::Exact,
                Formula::ExactTriangleHypotenuse,
            )));
        }
        if gamma.len() == 2 && all_distinct(gamma) && is_leg(gamma[0])? && is_leg(gamma[1])? {
            return Ok(Some(ConstantBound::new(
                leg / PI,
                BoundKind::Exact,
                Formula::ExactTriangleTwoLegs,
            )));
        }
        return Ok(None);
    }

    Ok(None)
}

fn all_distinct(gamma: &[usize]) -> bool {
    let mut g = gamma.to_vec();
    g.sort_unstable();
    g.dedup();
    g.len() == gamma.len()
}

/// Side lengths (h1, h2) when the cell is a rectangle.
fn rectangle_sides(cell: &Cell, tol: f64) -> Result<Option<(f64, f64)>> {
    if cell.kind() != CellKind::Quadrilateral || cell.dim() != 2 {
        return Ok(None);
    }
    let v = cell.vertices();
    for i in 0..4 {
        let a = v[(i + 1) % 4] - v[i];
        let b = v[(i + 2) % 4] - v[(i + 1) % 4];
        if a.dot(&b).abs() > tol * a.norm().max(b.norm()) {
            return Ok(None);
        }
    }
    Ok(Some(((v[1] - v[0]).norm(), (v[2] - v[1]).norm())))
}

/// Exact box constant when the cell has six planar rectangular faces in three
/// orthogonal pairs and gamma selects one of them.
fn box_match(cell: &Cell, gamma: &[usize], tol: f64) -> Result<Option<ConstantBound>> {
    if cell.dim() != 3 || gamma.len() != 1 || cell.faces().len() != 6 {
        return Ok(None);
    }
    for f in cell.faces() {
        if f.vertices.len() != 4 || f.is_curvilinear() {
            return Ok(None);
        }
    }
    for fi in 0..6 {
        let idx = &cell.faces()[fi].vertices;
        for k in 0..4 {
            let a = cell.vertices()[idx[(k + 1) % 4]] - cell.vertices()[idx[k]];
            let b = cell.vertices()[idx[(k + 2) % 4]] - cell.vertices()[idx[(k + 1) % 4]];
            if a.dot(&b).abs() > tol * a.norm().max(b.norm()) {
                return Ok(None);
            }
        }
    }
    let g = gamma[0];
    let n_g = cell.outward_unit_normal(g)?;
    let mut opposite = None;
    for fi in 0..6 {
        if fi == g {
            continue;
        }
        let n = cell.outward_unit_normal(fi)?;
        let d = n.dot(&n_g);
        if (d + 1.0).abs() <= 1e-9 {
            opposite = Some(fi);
        } else if d.abs() > 1e-9 {
            return Ok(None);
        }
    }
    let Some(opp) = opposite else {
        return Ok(None);
    };
    let h1 = (cell.face_centroid(opp)? - cell.face_centroid(g)?)
        .dot(&n_g)
        .abs();
    let idx = &cell.faces()[g].vertices;
    let h2 = (cell.vertices()[idx[1]] - cell.vertices()[idx[0]]).norm();
    let h3 = (cell.vertices()[idx[2]] - cell.vertices()[idx[1]]).norm();
    let value = (2.0 * h1).max(h2).max(h3) / PI;
    Ok(Some(ConstantBound::new(
        value,
        BoundKind::Exact,
        Formula::ExactBoxFace,
    )))
}

/// Leg length when the cell is a right isosceles triangle.
fn right_isosceles_leg(cell: &Cell, tol: f64) -> Result<Option<f64>> {
    if cell.kind() != CellKind::Triangle {
        return Ok(None);
    }
    let mut s: Vec<f64> = (0..3)
        .map(|i| cell.face_measure(i))
        .collect::<Result<_>>()?;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if (s[0] - s[1]).abs() <= tol && (s[2] - s[0] * 2.0f64.sqrt()).abs() <= 10.0 * tol {
        Ok(Some((s[0] + s[1]) / 2.0))
    } else {
        Ok(None)
    }
}

// ---- flux fields and the generic majorant -----------------------------------

/// A piecewise-affine vector field given by nodal values on simplices.
#[derive(Debug, Clone)]
pub struct FluxField {
    pub patches: Vec<FluxPatch>,
}

/// One simplex of a flux field with a nodal vector per vertex.
#[derive(Debug, Clone)]
pub struct FluxPatch {
    pub vertices: Vec<Point>,
    pub values: Vec<Vector>,
}

impl FluxPatch {
    fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    fn measure(&self) -> f64 {
        match self.dim() {
            2 => {
                let e1 = self.vertices[1] - self.vertices[0];
                let e2 = self.vertices[2] - self.vertices[0];
                0.5 * e1.cross(&e2).norm()
            }
            _ => {
                let e1 = self.vertices[1] - self.vertices[0];
                let e2 = self.vertices[2] - self.vertices[0];
                let e3 = self.vertices[3] - self.vertices[0];
                e1.cross(&e2).dot(&e3).abs() / 6.0
            }
        }
    }

    /// Constant divergence of the affine interpolant of the nodal values.
    fn divergence(&self) -> f64 {
        let grads = self.hat_gradients();
        self.values.iter().zip(&grads).map(|(v, g)| v.dot(g)).sum()
    }

    /// Gradients of the P1 hat functions on the simplex.
    fn hat_gradients(&self) -> Vec<Vector> {
        let v = &self.vertices;
        match self.dim() {
            2 => {
                let e1 = v[1] - v[0];
                let e2 = v[2] - v[0];
                let a2 = e1.x * e2.y - e1.y * e2.x;
                let rot = |p: &Point, q: &Point| Vector::new(p.y - q.y, q.x - p.x, 0.0);
                vec![
                    rot(&v[1], &v[2]) / a2,
                    rot(&v[2], &v[0]) / a2,
                    rot(&v[0], &v[1]) / a2,
                ]
            }
            _ => {
                let e1 = v[1] - v[0];
                let e2 = v[2] - v[0];
                let e3 = v[3] - v[0];
                let vol6 = e1.cross(&e2).dot(&e3);
                let g1 = e2.cross(&e3) / vol6;
                let g2 = e3.cross(&e1) / vol6;
                let g3 = e1.cross(&e2) / vol6;
                vec![-(g1 + g2 + g3), g1, g2, g3]
            }
        }
    }

    /// Exact integral of |tau|^2 for the affine interpolant:
    /// |T| (|sum tau_i|^2 + sum |tau_i|^2) / ((d+1)(d+2)).
    fn norm_squared(&self) -> f64 {
        let d = self.dim() as f64;
        let sum: Vector = self.values.iter().sum();
        let sq: f64 = self.values.iter().map(|v| v.norm_squared()).sum();
        self.measure() * (sum.norm_squared() + sq) / ((d + 1.0) * (d + 2.0))
    }

    /// Facets of the simplex as local vertex index lists.
    fn facets(&self) -> Vec<Vec<usize>> {
        match self.dim() {
            2 => vec![vec![0, 1], vec![1, 2], vec![2, 0]],
            _ => vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]],
        }
    }
}

impl FluxField {
    /// Exact L2 norm squared over all patches.
    pub fn norm_squared(&self) -> f64 {
        self.patches.iter().map(|p| p.norm_squared()).sum()
    }
}

/// Majorant sqrt(C_P^2 + |Omega| / |Gamma|^2 * ||tau||^2) for a flux field
/// with div tau = |Gamma|/|Omega|, tau.n = 1 on gamma and 0 on the rest of
/// the boundary; all side conditions are verified numerically to 1e-8.
pub fn c_gamma_majorant_generic(
    cell: &Cell,
    gamma: usize,
    tau: &FluxField,
    cp: &ConstantBound,
) -> Result<ConstantBound> {
    let omega = cell.measure()?;
    let gamma_measure = cell.face_measure(gamma)?;
    let target_div = gamma_measure / omega;
    let scale = cell.diameter()?;
    let tol = 1e-8;

    for (pi, patch) in tau.patches.iter().enumerate() {
        let div = patch.divergence();
        if (div - target_div).abs() > tol * target_div.abs().max(1.0 / scale) {
            return Err(Error::InvalidFlux(format!(
                "patch {pi}: div = {div:.6e}, required |Gamma|/|Omega| = {target_div:.6e}"
            )));
        }
        // boundary conditions at facet vertices (the trace of an affine field
        // is affine, so vertex checks pin it on each facet)
        for facet in patch.facets() {
            let mid = Point::from(
                facet
                    .iter()
                    .map(|&i| patch.vertices[i].coords)
                    .sum::<Vector>()
                    / facet.len() as f64,
            );
            let face_tol = GEOMETRY_TOL * scale * 100.0;
            let on_face =
                (0..cell.faces().len()).find(|&f| cell.face_contains(f, &mid, face_tol));
            let Some(f) = on_face else {
                continue; // interior facet
            };
            if !facet
                .iter()
                .all(|&i| cell.face_contains(f, &patch.vertices[i], face_tol))
            {
                continue;
            }
            let n = cell.mean_normal(f)?;
            let want = if f == gamma { 1.0 } else { 0.0 };
            for &i in &facet {
                let got = patch.values[i].dot(&n);
                if (got - want).abs() > tol {
                    return Err(Error::InvalidFlux(format!(
                        "patch {pi}: tau.n = {got:.6e} on face {f}, required {want}"
                    )));
                }
            }
        }
    }

    let value =
        (cp.value * cp.value + omega / (gamma_measure * gamma_measure) * tau.norm_squared()).sqrt();
    let mut bound = ConstantBound::new(value, BoundKind::Upper, Formula::FluxMajorant);
    bound.preconditions = cp.preconditions.clone();
    Ok(bound)
}

/// The affine flux field on a triangle whose nodal values are, in a frame
/// aligned with gamma, (-cot a, 1), (0, 0) and (cot b, 1) when written in
/// tangent/outward-normal components.
pub fn triangle_flux_field(cell: &Cell, gamma: usize) -> Result<FluxField> {
    if cell.kind() != CellKind::Triangle {
        return Err(Error::UnsupportedCellKind(
            "triangle flux field needs a triangle".into(),
        ));
    }
    let face = cell.face(gamma)?;
    let (a, c) = (face.vertices[0], face.vertices[1]);
    let b = (0..3).find(|v| *v != a && *v != c).unwrap();
    let (pa, pb, pc) = (cell.vertices()[a], cell.vertices()[b], cell.vertices()[c]);
    let (alpha, beta) = cell.triangle_edge_angles(gamma)?;
    let t = (pc - pa).normalize();
    let n = cell.outward_unit_normal(gamma)?;
    let (ca, cb) = (alpha.cos() / alpha.sin(), beta.cos() / beta.sin());
    Ok(FluxField {
        patches: vec![FluxPatch {
            vertices: vec![pa, pb, pc],
            values: vec![t * (-ca) + n, Vector::zeros(), t * cb + n],
        }],
    })
}

/// The affine flux field on a tetrahedron: zero at the apex, edge/height at
/// the base vertices.
pub fn tet_flux_field(cell: &Cell, gamma: usize) -> Result<FluxField> {
    if cell.kind() != CellKind::Tetrahedron {
        return Err(Error::UnsupportedCellKind(
            "tetrahedron flux field needs a tetrahedron".into(),
        ));
    }
    let face = cell.face(gamma)?.clone();
    let apex = (0..4).find(|v| !face.vertices.contains(v)).unwrap();
    let n = cell.outward_unit_normal(gamma)?;
    let o = cell.vertices()[apex];
    let mut vertices = vec![o];
    let mut values = vec![Vector::zeros()];
    for &v in &face.vertices {
        let p = cell.vertices()[v];
        let edge = p - o;
        vertices.push(p);
        values.push(edge / edge.dot(&n));
    }
    Ok(FluxField {
        patches: vec![FluxPatch { vertices, values }],
    })
}

/// Per-tetrahedron flux field of a pyramid split along the base diagonal.
pub fn pyramid_flux_field(cell: &Cell) -> Result<FluxField> {
    if cell.kind() != CellKind::Pyramid {
        return Err(Error::UnsupportedCellKind(
            "pyramid flux field needs a pyramid".into(),
        ));
    }
    let v = cell.vertices();
    let n = cell.outward_unit_normal(0)?;
    let o = v[0];
    let patch = |ids: [usize; 3]| {
        let mut vertices = vec![o];
        let mut values = vec![Vector::zeros()];
        for id in ids {
            let edge = v[id] - o;
            vertices.push(v[id]);
            values.push(edge / edge.dot(&n));
        }
        FluxPatch { vertices, values }
    };
    Ok(FluxField {
        patches: vec![patch([1, 2, 3]), patch([1, 3, 4])],
    })
}

// ---- composite bounds ---------------------------------------------------------

/// Triangle bound sqrt(C_P^2 + h^2 Sigma / 24) over the edge gamma.
pub fn c_gamma_triangle(cell: &Cell, gamma: usize, mode: CpMode) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Triangle {
        return Err(Error::UnsupportedCellKind(
            "triangle bound needs a triangle".into(),
        ));
    }
    let cp = cp_upper(cell, mode)?;
    let sigma = cell.sigma_alpha_beta(gamma)?;
    let h = cell.triangle_height_over(gamma)?;
    let value = (cp.value * cp.value + h * h * sigma / 24.0).sqrt();
    let mut b = ConstantBound::new(value, BoundKind::Upper, Formula::TriangleMajorant);
    b.preconditions = cp.preconditions;
    Ok(b)
}

/// Lower bound d / (2 j_{0,1}), valid for every face selection (d = 2).
pub fn c_gamma_lower(cell: &Cell) -> Result<ConstantBound> {
    let cp = cp_lower_cheng(cell)?;
    Ok(ConstantBound::new(
        cp.value,
        BoundKind::Lower,
        Formula::CGammaLowerBessel,
    ))
}

/// Which diagonal splits the quadrilateral for the composite bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadSplit {
    /// Pick the internal diagonal that maximizes |Omega_1|.
    Auto,
    /// Diagonal from the first gamma endpoint.
    FromGammaStart,
    /// Diagonal from the second gamma endpoint.
    FromGammaEnd,
}

/// Quadrilateral bound: the cell splits into the triangle containing gamma
/// and a remainder glued along one shared edge, giving
/// sqrt(C_P^2 + (kappa C_P + sqrt(Sigma) |Omega| / (sqrt 6 |Gamma|))^2).
pub fn c_gamma_quadrilateral(
    cell: &Cell,
    gamma: usize,
    split: QuadSplit,
    mode: CpMode,
) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Quadrilateral {
        return Err(Error::UnsupportedCellKind(
            "quadrilateral bound needs a quadrilateral".into(),
        ));
    }
    let cp = cp_upper(cell, mode)?;
    let face = cell.face(gamma)?;
    let (i, j) = (face.vertices[0], face.vertices[1]);
    let v = cell.vertices();
    let signed = |a: usize, b: usize, c: usize| {
        (v[b].x - v[a].x) * (v[c].y - v[a].y) - (v[b].y - v[a].y) * (v[c].x - v[a].x)
    };
    let k = (j + 1) % 4;
    let l = (i + 3) % 4;
    let start_valid = signed(i, j, k) > 0.0 && signed(i, k, l) > 0.0;
    let end_valid = signed(l, i, j) > 0.0 && signed(l, j, k) > 0.0;
    let use_start = match split {
        QuadSplit::FromGammaStart => {
            if !start_valid {
                return Err(Error::PreconditionNotMet(
                    "requested split diagonal is not internal".into(),
                ));
            }
            true
        }
        QuadSplit::FromGammaEnd => {
            if !end_valid {
                return Err(Error::PreconditionNotMet(
                    "requested split diagonal is not internal".into(),
                ));
            }
            false
        }
        QuadSplit::Auto => {
            if start_valid && end_valid {
                signed(i, j, k) >= signed(l, i, j)
            } else if start_valid || end_valid {
                start_valid
            } else {
                return Err(Error::DegenerateGeometry(
                    "quadrilateral admits no internal diagonal".into(),
                ));
            }
        }
    };
    let (tri, rest) = if use_start {
        ([i, j, k], [i, k, l])
    } else {
        ([l, i, j], [l, j, k])
    };
    let area = |t: &[usize; 3]| signed(t[0], t[1], t[2]).abs() / 2.0;
    let o1 = area(&tri);
    let o2 = area(&rest);
    let omega = cell.measure()?;
    let gamma_len = cell.face_measure(gamma)?;
    // angles of the gamma-containing triangle at the gamma endpoints
    let tri_cell = Cell::triangle(v[tri[0]], v[tri[1]], v[tri[2]])?;
    let g_idx = (0..3)
        .find(|&fi| {
            let fv = &tri_cell.faces()[fi].vertices;
            let (a, b) = (tri_cell.vertices()[fv[0]], tri_cell.vertices()[fv[1]]);
            ((a - v[i]).norm() == 0.0 && (b - v[j]).norm() == 0.0)
                || ((a - v[j]).norm() == 0.0 && (b - v[i]).norm() == 0.0)
        })
        .expect("gamma edge present in split triangle");
    let sigma = tri_cell.sigma_alpha_beta(g_idx)?;
    let kappa = (o2 / o1).sqrt();
    let second = kappa * cp.value + sigma.sqrt() * omega / (6.0f64.sqrt() * gamma_len);
    let value = (cp.value * cp.value + second * second).sqrt();
    let mut b = ConstantBound::new(value, BoundKind::Upper, Formula::QuadrilateralMajorant);
    b.preconditions = cp.preconditions;
    Ok(b)
}

/// Tetrahedron bound from the apex edge vectors to the vertices of gamma:
/// sqrt(d^2/pi^2 + (sum of squares and pairwise products) / 90).
pub fn c_gamma_tetrahedron(cell: &Cell, gamma: usize) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Tetrahedron {
        return Err(Error::UnsupportedCellKind(
            "tetrahedron bound needs a tetrahedron".into(),
        ));
    }
    let face = cell.face(gamma)?.clone();
    let apex = (0..4).find(|v| !face.vertices.contains(v)).unwrap();
    let o = cell.vertices()[apex];
    let e: Vec<Vector> = face
        .vertices
        .iter()
        .map(|&v| cell.vertices()[v] - o)
        .collect();
    let sum = e[0].norm_squared()
        + e[1].norm_squared()
        + e[2].norm_squared()
        + e[0].dot(&e[1])
        + e[0].dot(&e[2])
        + e[1].dot(&e[2]);
    let d = cell.diameter()?;
    let value = (d * d / (PI * PI) + sum / 90.0).sqrt();
    Ok(ConstantBound::new(
        value,
        BoundKind::Upper,
        Formula::TetrahedronMajorant,
    ))
}

/// Pyramid bound over the quadrilateral base; the base triangles of the
/// diagonal split must have equal areas.
pub fn c_gamma_pyramid(cell: &Cell, gamma: usize) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Pyramid {
        return Err(Error::UnsupportedCellKind(
            "pyramid bound needs a pyramid".into(),
        ));
    }
    if gamma != 0 {
        return Err(Error::InvalidFaceSelection(
            "the pyramid bound is stated for the quadrilateral base".into(),
        ));
    }
    let v = cell.vertices();
    let tri_area = |a: usize, b: usize, c: usize| 0.5 * (v[b] - v[a]).cross(&(v[c] - v[a])).norm();
    let a1 = tri_area(1, 2, 3);
    let a2 = tri_area(1, 3, 4);
    if (a1 - a2).abs() > 1e-8 * a1.max(a2) {
        return Err(Error::PreconditionNotMet(format!(
            "base triangles must have equal areas ({a1:.6e} vs {a2:.6e})"
        )));
    }
    let o = v[0];
    let (eta, zeta, sig, chi) = (v[1] - o, v[2] - o, v[3] - o, v[4] - o);
    let sum = 2.0 * eta.norm_squared()
        + zeta.norm_squared()
        + 2.0 * sig.norm_squared()
        + chi.norm_squared()
        + 2.0 * eta.dot(&sig)
        + (eta + sig).dot(&(chi + zeta));
    let d = cell.diameter()?;
    let value = (d * d / (PI * PI) + sum / 180.0).sqrt();
    Ok(
        ConstantBound::new(value, BoundKind::Upper, Formula::PyramidMajorant)
            .with_precondition("equal base-triangle areas", true),
    )
}

/// Prism bound over the base: sqrt(C_P^2 + (<H>/sqrt 3 + C_P kappa)^2) with
/// kappa = sqrt(<H>/H_min - 1).
pub fn c_gamma_prism(cell: &Cell, mode: CpMode) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Prism {
        return Err(Error::UnsupportedCellKind(
            "prism bound needs a prism".into(),
        ));
    }
    let cp = cp_upper(cell, mode)?;
    let hmean = cell.prism_mean_height()?;
    let hmin = cell.prism_min_height()?;
    let kappa = (hmean / hmin - 1.0).max(0.0).sqrt();
    let second = hmean / 3.0f64.sqrt() + cp.value * kappa;
    let value = (cp.value * cp.value + second * second).sqrt();
    let mut b = ConstantBound::new(value, BoundKind::Upper, Formula::PrismMajorant);
    b.preconditions = cp.preconditions;
    Ok(b)
}

/// Constant-height convex-base form: sqrt(d_base^2 + (1 + pi^2/3) H^2) / pi.
pub fn c_gamma_prism_constant_height(cell: &Cell) -> Result<ConstantBound> {
    if cell.kind() != CellKind::Prism {
        return Err(Error::UnsupportedCellKind(
            "prism bound needs a prism".into(),
        ));
    }
    let heights = cell.heights();
    let h0 = heights[0];
    if heights.iter().any(|h| (h - h0).abs() > GEOMETRY_TOL * h0) {
        return Err(Error::PreconditionNotMet(
            "constant-height form needs a constant height".into(),
        ));
    }
    let n = cell.base_len();
    let base: Vec<Point> = cell.vertices()[..n].to_vec();
    let base_cell = Cell::polygon(base)?;
    if !base_cell.is_convex()? {
        return Err(Error::PreconditionNotMet(
            "constant-height form needs a convex base".into(),
        ));
    }
    let d_base = base_cell.diameter()?;
    let value = ((d_base * d_base + (1.0 + PI * PI / 3.0) * h0 * h0) / (PI * PI)).sqrt();
    Ok(ConstantBound::new(
        value,
        BoundKind::Upper,
        Formula::PrismConstantHeight,
    )
    .with_precondition("constant height", true)
    .with_precondition("convex base", true))
}

/// Best available C_Gamma upper bound for a face selection: the exact
/// catalogue value when it applies, otherwise the cell kind's majorant.
pub fn best_c_gamma_upper(cell: &Cell, gamma: &[usize], mode: CpMode) -> Result<ConstantBound> {
    if let Some(exact) = exact_table1(cell, gamma)? {
        return Ok(exact);
    }
    if gamma.len() != 1 {
        return Err(Error::PreconditionNotMet(
            "no closed-form bound for this multi-face selection; the generic majorant requires a flux field"
                .into(),
        ));
    }
    let g = gamma[0];
    match cell.kind() {
        CellKind::Triangle => c_gamma_triangle(cell, g, mode),
        CellKind::Quadrilateral => c_gamma_quadrilateral(cell, g, QuadSplit::Auto, mode),
        CellKind::Tetrahedron => c_gamma_tetrahedron(cell, g),
        CellKind::Pyramid => c_gamma_pyramid(cell, g),
        CellKind::Prism if g == 0 => c_gamma_prism(cell, mode),
        _ => Err(Error::PreconditionNotMet(
            "no closed-form bound for this cell/face combination; the generic majorant requires a flux field"
                .into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point2, point3};
    use approx::assert_relative_eq;

    fn unit_square() -> Cell {
        Cell::quadrilateral([
            point2(0.0, 0.0),
            point2(1.0, 0.0),
            point2(1.0, 1.0),
            point2(0.0, 1.0),
        ])
        .unwrap()
    }

    fn unit_right_triangle() -> Cell {
        Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.0, 1.0)).unwrap()
    }

    fn leg_face(cell: &Cell) -> usize {
        // an edge of length 1 touching the right-angle vertex (0, 0)
        (0..3)
            .find(|&i| (cell.face_measure(i).unwrap() - 1.0).abs() < 1e-12)
            .unwrap()
    }

    fn hyp_face(cell: &Cell) -> usize {
        (0..3)
            .find(|&i| (cell.face_measure(i).unwrap() - 2.0f64.sqrt()).abs() < 1e-12)
            .unwrap()
    }

    #[test]
    fn cp_classical_values() {
        let sq = unit_square();
        let b = cp_upper_classical(&sq).unwrap();
        assert_relative_eq!(b.value, (7.0f64 / 24.0).sqrt() * 2.0f64.sqrt(), epsilon = 1e-14);
        // d = 2 with unit diameter: 0.5401
        let tri = Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.5, 0.5)).unwrap();
        assert_relative_eq!(cp_upper_classical(&tri).unwrap().value, 0.5401, epsilon = 1e-4);
        let tet = Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(0.0, 1.0, 0.0),
            point3(0.0, 0.0, 1.0),
        ])
        .unwrap();
        assert_relative_eq!(
            cp_upper_classical(&tet).unwrap().value,
            0.75 * 2.0f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn cp_convex_values() {
        let sq = unit_square();
        assert_relative_eq!(
            cp_upper_convex(&sq).unwrap().value,
            2.0f64.sqrt() / PI,
            epsilon = 1e-14
        );
        // unit diameter: 0.3183
        let tri = Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.5, 0.5)).unwrap();
        assert_relative_eq!(cp_upper_convex(&tri).unwrap().value, 0.3183, epsilon = 1e-4);
        // L-shaped macrocell: precondition error
        let a = unit_square();
        let b = a.transformed(
            &nalgebra::Rotation3::identity(),
            &Vector::new(1.0, 0.0, 0.0),
        );
        let c = a.transformed(
            &nalgebra::Rotation3::identity(),
            &Vector::new(0.0, 1.0, 0.0),
        );
        let mac = Cell::macrocell(vec![a, b, c]).unwrap();
        assert!(matches!(
            cp_upper_convex(&mac),
            Err(Error::PreconditionNotMet(_))
        ));
    }

    #[test]
    fn cp_lower_and_isosceles() {
        let tri = Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.5, 0.5)).unwrap();
        assert_relative_eq!(cp_lower_cheng(&tri).unwrap().value, 0.2079, epsilon = 1e-4);
        let tri2 = unit_right_triangle();
        // d = sqrt 2: 0.2079 * sqrt 2 doubled scale
        assert_relative_eq!(
            cp_lower_cheng(&tri2.scaled(2.0)).unwrap().value,
            2.0 * cp_lower_cheng(&tri2).unwrap().value,
            epsilon = 1e-12
        );
        let tet = Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(0.0, 1.0, 0.0),
            point3(0.0, 0.0, 1.0),
        ])
        .unwrap();
        assert!(cp_lower_cheng(&tet).is_err());
        // isosceles: right isosceles triangle with legs 1, diameter sqrt 2
        let b = cp_upper_isosceles(&tri2).unwrap();
        assert_relative_eq!(b.value, 2.0f64.sqrt() / BESSEL_J1_FIRST_ROOT, epsilon = 1e-14);
        assert_relative_eq!(b.value, 0.3691, epsilon = 1e-4);
        let scalene =
            Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.3, 0.9)).unwrap();
        assert!(cp_upper_isosceles(&scalene).is_err());
    }

    #[test]
    fn exact_catalogue_values() {
        let sq = unit_square();
        let side = exact_table1(&sq, &[0]).unwrap().unwrap();
        assert_relative_eq!(side.value, 2.0 / PI, epsilon = 1e-14);
        assert_eq!(side.formula, Formula::ExactRectangleFace);
        let all = exact_table1(&sq, &[0, 1, 2, 3]).unwrap().unwrap();
        assert_relative_eq!(all.value, 1.0 / PI, epsilon = 1e-14);
        // rectangle 0.75 x 0.5, gamma = short side: perp extent 0.75
        let rect = Cell::quadrilateral([
            point2(0.0, 0.0),
            point2(0.75, 0.0),
            point2(0.75, 0.5),
            point2(0.0, 0.5),
        ])
        .unwrap();
        let g = exact_table1(&rect, &[1]).unwrap().unwrap();
        assert_relative_eq!(g.value, 1.5 / PI, epsilon = 1e-14);

        let tri = unit_right_triangle();
        let leg = exact_table1(&tri, &[leg_face(&tri)]).unwrap().unwrap();
        assert_relative_eq!(leg.value, 1.0 / TRIANGLE_LEG_ZETA, epsilon = 1e-12);
        assert_relative_eq!(leg.value, 0.4929, epsilon = 1e-4);
        let hyp = exact_table1(&tri, &[hyp_face(&tri)]).unwrap().unwrap();
        assert_relative_eq!(hyp.value, 2.0f64.sqrt() / TRIANGLE_LEG_ZETA, epsilon = 1e-12);
        assert_relative_eq!(hyp.value, 0.6971, epsilon = 1e-4);
        let legs: Vec<usize> = (0..3).filter(|&i| i != hyp_face(&tri)).collect();
        let two = exact_table1(&tri, &legs).unwrap().unwrap();
        assert_relative_eq!(two.value, 1.0 / PI, epsilon = 1e-14);

        // box 0.75 x 0.5 x 0.6, gamma = face x1 = 0 (a side quad of the prism)
        let bx = Cell::rectangular_box(0.75, 0.5, 0.6).unwrap();
        // face 5 is the side over base edge (3, 0), the x = 0 plane
        let g = exact_table1(&bx, &[5]).unwrap().unwrap();
        assert_relative_eq!(g.value, 1.5 / PI, epsilon = 1e-12);
        assert_eq!(g.formula, Formula::ExactBoxFace);

        // no match: scalene triangle
        let scalene =
            Cell::triangle(point2(0.0, 0.0), point2(1.0, 0.0), point2(0.3, 0.9)).unwrap();
        assert!(exact_table1(&scalene, &[0]).unwrap().is_none());
    }

    #[test]
    fn triangle_bound_values() {
        // right isosceles, gamma = leg: angles pi/2 and pi/4, h = 1
        let tri = unit_right_triangle();
        let g = leg_face(&tri);
        let b = c_gamma_triangle(&tri, g, CpMode::Convex).unwrap();
        let expected = (2.0 / (PI * PI) + 4.0 / 24.0).sqrt();
        assert_relative_eq!(b.value, expected, epsilon = 1e-14);
        // the exact-arithmetic value; the display form rounded from
        // 0.4757 sqrt(1 + 0.6354) gives 0.6083
        assert_relative_eq!(b.value, 0.607708, epsilon = 1e-6);
        // scaling homogeneity
        let b2 = c_gamma_triangle(&tri.scaled(3.0), g, CpMode::Convex).unwrap();
        assert_relative_eq!(b2.value, 3.0 * b.value, epsilon = 1e-12);
    }

    #[test]
    fn generic_majorant_reproduces_triangle_bound() {
        for (tri, g) in [
            (unit_right_triangle(), 0usize),
            (
                Cell::triangle(point2(0.2, -0.1), point2(1.4, 0.3), point2(0.4, 1.2)).unwrap(),
                1,
            ),
            (
                Cell::triangle(point2(0.0, 0.0), point2(2.0, 0.0), point2(1.3, 0.8)).unwrap(),
                2,
            ),
        ] {
            let tau = triangle_flux_field(&tri, g).unwrap();
            let cp = cp_upper_convex(&tri).unwrap();
            let generic = c_gamma_majorant_generic(&tri, g, &tau, &cp).unwrap();
            let closed = c_gamma_triangle(&tri, g, CpMode::Convex).unwrap();
            assert_relative_eq!(generic.value, closed.value, epsilon = 1e-12);
            assert!(generic.value >= cp.value);
        }
    }

    #[test]
    fn majorant_rejects_invalid_flux() {
        let tri = unit_right_triangle();
        let mut tau = triangle_flux_field(&tri, 0).unwrap();
        tau.patches[0].values[0] *= 1.5;
        let cp = cp_upper_convex(&tri).unwrap();
        assert!(matches!(
            c_gamma_majorant_generic(&tri, 0, &tau, &cp),
            Err(Error::InvalidFlux(_))
        ));
    }

    #[test]
    fn lower_bound_values() {
        let tri = unit_right_triangle();
        let b = c_gamma_lower(&tri).unwrap();
        // alpha = pi/2, beta = pi/4: 0.2079 h sqrt(1 + cot^2 beta) with h = 1
        assert_relative_eq!(b.value, 0.2079 * 2.0f64.sqrt(), epsilon = 1e-4);
        // lower <= exact for all catalogue rows on this triangle
        for g in 0..3 {
            let exact = exact_table1(&tri, &[g]).unwrap().unwrap();
            assert!(b.value <= exact.value);
        }
    }

    #[test]
    fn quadrilateral_bound() {
        let sq = unit_square();
        let b = c_gamma_quadrilateral(&sq, 0, QuadSplit::Auto, CpMode::Convex).unwrap();
        assert!(b.value.is_finite());
        assert!(b.value >= 2.0 / PI);
        // kappa = 1 for the diagonal split of a square: both halves equal
        let cp = cp_upper_convex(&sq).unwrap().value;
        let expected = {
            let kappa = 1.0;
            let sigma: f64 = 4.0; // angles pi/4 and pi/2 adjacent to gamma
            let second = kappa * cp + sigma.sqrt() * 1.0 / 6.0f64.sqrt();
            (cp * cp + second * second).sqrt()
        };
        assert_relative_eq!(b.value, expected, epsilon = 1e-12);
        // degenerate second domain reduces to the triangle bound: compare a
        // triangle bound against the quadrilateral formula with kappa -> 0
        let tri = unit_right_triangle();
        let tri_bound = c_gamma_triangle(&tri, 0, CpMode::Value(cp)).unwrap();
        let manual = {
            let sigma = tri.sigma_alpha_beta(0).unwrap();
            let omega = tri.measure().unwrap();
            let gamma_len = tri.face_measure(0).unwrap();
            let second = 0.0 * cp + sigma.sqrt() * omega / (6.0f64.sqrt() * gamma_len);
            (cp * cp + second * second).sqrt()
        };
        assert_relative_eq!(tri_bound.value, manual, epsilon = 1e-12);
    }

    #[test]
    fn tetrahedron_bound_values() {
        // equilateral with edge h: h sqrt(1/pi^2 + 1/20) = 0.389 h
        for h in [1.0, 2.0] {
            let base = [
                point3(0.0, 0.0, 0.0),
                point3(h, 0.0, 0.0),
                point3(h / 2.0, h * 3.0f64.sqrt() / 2.0, 0.0),
            ];
            let centroid = Point::from((base[0].coords + base[1].coords + base[2].coords) / 3.0);
            let apex = point3(centroid.x, centroid.y, h * (2.0f64 / 3.0).sqrt());
            let tet = Cell::tetrahedron([base[0], base[1], base[2], apex]).unwrap();
            // gamma = base = face not containing the apex (vertex 3) = face 3
            let b = c_gamma_tetrahedron(&tet, 3).unwrap();
            let expected = h * (1.0 / (PI * PI) + 1.0 / 20.0).sqrt();
            assert_relative_eq!(b.value, expected, epsilon = 1e-12);
            assert_relative_eq!(b.value / h, 0.389, epsilon = 1e-3);
        }
        // right tetrahedron, gamma = {x3 = 0}: h sqrt(2/pi^2 + 4/45) = 0.54 h
        let tet = Cell::tetrahedron([
            point3(0.0, 0.0, 0.0),
            point3(1.0, 0.0, 0.0),
            point3(0.0, 1.0, 0.0),
            point3(0.0, 0.0, 1.0),
        ])
        .unwrap();
        let b = c_gamma_tetrahedron(&tet, 2).unwrap();
        let expected = (2.0 / (PI * PI) + 4.0f64 / 45.0).sqrt();
        assert_relative_eq!(b.value, expected, epsilon = 1e-14);
        assert_relative_eq!(b.value, 0.5399, epsilon = 1e-4);
        // scaling
        let b2 = c_gamma_tetrahedron(&tet.scaled(2.5), 2).unwrap();
        assert_relative_eq!(b2.value, 2.5 * b.value, epsilon = 1e-12);
    }

    #[test]
    fn tet_majorant_agrees_with_flux_route() {
        let tet = Cell::tetrahedron([
            point3(0.1, 0.0, 0.0),
            point3(1.2, 0.1, 0.0),
            point3(0.2, 1.1, 0.1),
            point3(0.3, 0.2, 1.4),
        ])
        .unwrap();
        for g in 0..4 {
            let tau = tet_flux_field(&tet, g).unwrap();
            let cp = cp_upper_convex(&tet).unwrap();
            let generic = c_gamma_majorant_generic(&tet, g, &tau, &cp).unwrap();
            let closed = c_gamma_tetrahedron(&tet, g).unwrap();
            assert_relative_eq!(generic.value, closed.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn pyramid_bound_and_flux_route() {
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
        let b = c_gamma_pyramid(&pyr, 0).unwrap();
        let tau = pyramid_flux_field(&pyr).unwrap();
        let cp = cp_upper_convex(&pyr).unwrap();
        let generic = c_gamma_majorant_generic(&pyr, 0, &tau, &cp).unwrap();
        assert_relative_eq!(b.value, generic.value, epsilon = 1e-12);
        // scaling
        let b2 = c_gamma_pyramid(&pyr.scaled(2.0), 0).unwrap();
        assert_relative_eq!(b2.value, 2.0 * b.value, epsilon = 1e-12);
        // unequal base split areas
        let skew = Cell::pyramid(
            point3(0.5, 0.5, 1.0),
            [
                point3(0.0, 0.0, 0.0),
                point3(1.0, 0.0, 0.0),
                point3(1.4, 1.3, 0.0),
                point3(0.0, 1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            c_gamma_pyramid(&skew, 0),
            Err(Error::PreconditionNotMet(_))
        ));
    }

    #[test]
    fn prism_ratio_examples() {
        // cube: bound/exact = sqrt(6.29)/2, about 1.25
        let cube = Cell::rectangular_box(1.0, 1.0, 1.0).unwrap();
        let bound = c_gamma_prism(&cube, CpMode::Convex).unwrap();
        let exact = exact_table1(&cube, &[0]).unwrap().unwrap();
        let ratio = bound.value / exact.value;
        assert_relative_eq!(ratio, 6.29f64.sqrt() / 2.0, epsilon = 1e-3);
        // constant-height form agrees with the kappa = 0 bound
        let ch = c_gamma_prism_constant_height(&cube).unwrap();
        assert_relative_eq!(ch.value, bound.value, epsilon = 1e-12);
        // a = b = 2H: ratio about 1.75
        let wide = Cell::rectangular_box(2.0, 2.0, 1.0).unwrap();
        let ratio2 = c_gamma_prism(&wide, CpMode::Convex).unwrap().value
            / exact_table1(&wide, &[0]).unwrap().unwrap().value;
        assert_relative_eq!(ratio2, 1.75, epsilon = 0.01);
        // kappa = 0 for constant heights
        assert_relative_eq!(
            c_gamma_prism(&cube, CpMode::Convex).unwrap().value,
            {
                let cp = cp_upper_convex(&cube).unwrap().value;
                (cp * cp + 1.0f64 / 3.0).sqrt()
            },
            epsilon = 1e-12
        );
    }

    #[test]
    fn convex_beats_classical_on_convex_cells() {
        for cell in [
            unit_square(),
            unit_right_triangle(),
            Cell::rectangular_box(1.0, 2.0, 0.5).unwrap(),
        ] {
            let convex = cp_upper_convex(&cell).unwrap().value;
            let classical = cp_upper_classical(&cell).unwrap().value;
            assert!(convex <= classical);
        }
    }

    #[test]
    fn macrocell_max_composition() {
        let b1 = ConstantBound::user_supplied(0.3);
        let b2 = ConstantBound::user_supplied(0.5);
        let max = ConstantBound::macrocell_max(&[b1, b2]).unwrap();
        assert_relative_eq!(max.value, 0.5);
        assert!(ConstantBound::macrocell_max(&[]).is_err());
        // two unit right triangles composed via leg constants
        let tri = unit_right_triangle();
        let leg = exact_table1(&tri, &[leg_face(&tri)]).unwrap().unwrap();
        let composed = ConstantBound::macrocell_max(&[leg.clone(), leg]).unwrap();
        assert_relative_eq!(composed.value, 0.4929, epsilon = 1e-4);
    }
}

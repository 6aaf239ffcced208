//! Constants for the vector Poincare-type inequality: scalar constants per
//! selected face composed with the normal-system geometry, plus macrocell
//! composition by pairs.

use crate::error::{Error, Result};
use crate::geometry::{NormalSystem, TMatrix};
use crate::scalar_bounds::ConstantBound;
use serde::Serialize;

/// Which composition produced a vector constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VectorFormula {
    /// Two-face planar composition max{C} sqrt((1+|cos b|)/(1-|cos b|)).
    PairAngle2d,
    /// General composition max{C} sqrt(d / lambda_1).
    General,
    /// Maximum over macrocell face pairs.
    MacrocellPairs,
}

/// A bound for the constant in the vector inequality with zero mean normal
/// traces on d faces.
#[derive(Debug, Clone, Serialize)]
pub struct VectorConstant {
    pub value: f64,
    /// Scalar constants entering the composition, one per selected face.
    pub scalar_values: Vec<f64>,
    pub lambda_min: f64,
    pub formula: VectorFormula,
}

/// Two-face composition for d = 2 from the angle between the normals:
/// max{c1, c2} sqrt((1 + |cos beta|) / (1 - |cos beta|)).
pub fn vector_constant_2d(
    c1: &ConstantBound,
    c2: &ConstantBound,
    beta: f64,
) -> Result<VectorConstant> {
    // below the determinant tolerance the constant blows up
    if !(beta > 0.0 && beta < std::f64::consts::PI) || beta.sin().abs() <= crate::geometry::DET_TOL
    {
        return Err(Error::DependentNormals {
            det: beta.sin(),
            tol: crate::geometry::DET_TOL,
        });
    }
    let cos = beta.cos().abs();
    let factor = ((1.0 + cos) / (1.0 - cos)).sqrt();
    Ok(VectorConstant {
        value: c1.value.max(c2.value) * factor,
        scalar_values: vec![c1.value, c2.value],
        lambda_min: 1.0 - cos,
        formula: VectorFormula::PairAngle2d,
    })
}

/// General composition for any dimension: max_k{C_k} sqrt(d / lambda_1) with
/// lambda_1 the smallest eigenvalue of T.
pub fn vector_constant_general(
    constants: &[ConstantBound],
    ns: &NormalSystem,
) -> Result<VectorConstant> {
    if constants.len() != ns.dim() {
        return Err(Error::InvalidFaceSelection(format!(
            "need {} scalar constants, got {}",
            ns.dim(),
            constants.len()
        )));
    }
    let t = TMatrix::from_normal_system(ns);
    let max = constants.iter().map(|c| c.value).fold(0.0, f64::max);
    let d = ns.dim() as f64;
    Ok(VectorConstant {
        value: max * (d / t.lambda_min()).sqrt(),
        scalar_values: constants.iter().map(|c| c.value).collect(),
        lambda_min: t.lambda_min(),
        formula: VectorFormula::General,
    })
}

/// Preferred composition: the sharper two-face form for d = 2, the general
/// form otherwise.
pub fn vector_constant(constants: &[ConstantBound], ns: &NormalSystem) -> Result<VectorConstant> {
    if ns.dim() == 2 && constants.len() == 2 {
        vector_constant_2d(&constants[0], &constants[1], ns.angle_2d())
    } else {
        vector_constant_general(constants, ns)
    }
}

/// Maximum of child scalar constants over a macrocell decomposition.
pub fn macrocell_scalar_constant(children: &[ConstantBound]) -> Result<ConstantBound> {
    ConstantBound::macrocell_max(children)
}

/// Maximum of face-pair vector constants over a macrocell pairing plan; the
/// paired subdomain measures must add up to the macrocell measure.
pub fn macrocell_vector_constant(
    pair_constants: &[(f64, VectorConstant)],
    macro_measure: f64,
) -> Result<VectorConstant> {
    if pair_constants.is_empty() {
        return Err(Error::InvalidPairing("no face pairs given".into()));
    }
    let covered: f64 = pair_constants.iter().map(|(m, _)| m).sum();
    if (covered - macro_measure).abs() > 1e-9 * macro_measure {
        return Err(Error::InvalidPairing(format!(
            "paired subdomains cover measure {covered:.6e} of {macro_measure:.6e}"
        )));
    }
    let mut best = &pair_constants[0].1;
    for (_, c) in pair_constants.iter().skip(1) {
        if c.value > best.value {
            best = c;
        }
    }
    Ok(VectorConstant {
        value: best.value,
        scalar_values: best.scalar_values.clone(),
        lambda_min: best.lambda_min,
        formula: VectorFormula::MacrocellPairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn c(v: f64) -> ConstantBound {
        ConstantBound::user_supplied(v)
    }

    fn pair_system(beta: f64) -> NormalSystem {
        NormalSystem::new(
            2,
            vec![
                Vector::new(1.0, 0.0, 0.0),
                Vector::new(beta.cos(), beta.sin(), 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_face_composition_values() {
        // orthogonal normals: factor 1
        let v = vector_constant_2d(&c(0.3), &c(0.7), FRAC_PI_2).unwrap();
        assert_relative_eq!(v.value, 0.7, epsilon = 1e-14);
        // beta = pi/3 with unit constants: sqrt(1.5 / 0.5) = sqrt 3
        let v = vector_constant_2d(&c(1.0), &c(1.0), FRAC_PI_3).unwrap();
        assert_relative_eq!(v.value, 3.0f64.sqrt(), epsilon = 1e-12);
        // angle collapse raises the dependent-normals error
        assert!(matches!(
            vector_constant_2d(&c(1.0), &c(1.0), 1e-12),
            Err(Error::DependentNormals { .. })
        ));
        assert!(vector_constant_2d(&c(1.0), &c(1.0), PI).is_err());
    }

    #[test]
    fn general_composition_values() {
        // d = 3 orthonormal: lambda = 1, factor sqrt 3
        let ns = NormalSystem::new(
            3,
            vec![
                Vector::new(1.0, 0.0, 0.0),
                Vector::new(0.0, 1.0, 0.0),
                Vector::new(0.0, 0.0, 1.0),
            ],
        )
        .unwrap();
        let v = vector_constant_general(&[c(0.4), c(0.4), c(0.4)], &ns).unwrap();
        assert_relative_eq!(v.value, 0.4 * 3.0f64.sqrt(), epsilon = 1e-12);
        // d = 2 at right angle: factor sqrt 2 vs the sharper pair factor 1
        let ns = pair_system(FRAC_PI_2);
        let general = vector_constant_general(&[c(1.0), c(1.0)], &ns).unwrap();
        assert_relative_eq!(general.value, 2.0f64.sqrt(), epsilon = 1e-12);
        let pair = vector_constant_2d(&c(1.0), &c(1.0), FRAC_PI_2).unwrap();
        assert!(general.value >= pair.value);
    }

    #[test]
    fn general_dominates_pair_form() {
        for k in 1..40 {
            let beta = PI * k as f64 / 40.0;
            let ns = pair_system(beta);
            let general = vector_constant_general(&[c(0.8), c(1.3)], &ns).unwrap();
            let pair = vector_constant_2d(&c(0.8), &c(1.3), beta).unwrap();
            assert!(general.value >= pair.value - 1e-12);
            assert_relative_eq!(general.lambda_min, pair.lambda_min, epsilon = 1e-12);
        }
    }

    #[test]
    fn macrocell_compositions() {
        let single = vector_constant_2d(&c(0.2), &c(0.3), FRAC_PI_2).unwrap();
        let got = macrocell_vector_constant(&[(1.0, single.clone())], 1.0).unwrap();
        assert_relative_eq!(got.value, single.value);
        let pair2 = vector_constant_2d(&c(0.5), &c(0.1), FRAC_PI_2).unwrap();
        let got = macrocell_vector_constant(&[(0.5, single), (0.5, pair2)], 1.0).unwrap();
        assert_relative_eq!(got.value, 0.5, epsilon = 1e-14);
        // coverage gap
        assert!(matches!(
            macrocell_vector_constant(
                &[(0.4, vector_constant_2d(&c(0.5), &c(0.1), FRAC_PI_2).unwrap())],
                1.0
            ),
            Err(Error::InvalidPairing(_))
        ));
    }
}

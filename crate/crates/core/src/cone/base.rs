use serde::Serialize;

use super::feasibility::{least_distance, nnls};
use super::{refs, NormKind, Point, PolyCone};
use crate::error::{Error, Result};

/// A linear functional `y -> coeffs . y`, audited to lie in the dual of the
/// cone it was built for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualFunctional {
    coeffs: Point,
    cone: String,
}

impl DualFunctional {
    /// Checks `coeffs . g >= -tol ||g||` on every generator, or, for a cone
    /// known only by inequalities, that `coeffs` lies in the cone spanned by
    /// them.
    pub fn new(coeffs: Point, cone: &PolyCone, tol: f64) -> Result<Self> {
        coeffs.check_dim(cone.dim())?;
        let in_dual = match (cone.generators(), cone.dual_generators()) {
            (Some(gens), _) => gens.iter().all(|g| coeffs.dot(g) >= -tol * g.norm(NormKind::Two)),
            (None, Some(duals)) => nnls(&refs(duals), coeffs.coords()).residual <= tol.max(1e-12),
            (None, None) => return Err(Error::NoRepresentation(cone.name().to_string())),
        };
        if !in_dual {
            return Err(Error::NotInDual(cone.name().to_string()));
        }
        Ok(DualFunctional { coeffs, cone: cone.name().to_string() })
    }

    /// The normalized inequality functionals of a cone, as functionals.
    pub fn dual_generators_of(cone: &PolyCone) -> Result<Vec<DualFunctional>> {
        let completed;
        let duals = match cone.dual_generators() {
            Some(d) => d,
            None => {
                completed = cone.with_inequalities()?;
                completed.dual_generators().expect("completed")
            }
        };
        Ok(duals
            .iter()
            .map(|a| DualFunctional { coeffs: a.clone(), cone: cone.name().to_string() })
            .collect())
    }

    pub fn coeffs(&self) -> &Point {
        &self.coeffs
    }

    pub fn cone_name(&self) -> &str {
        &self.cone
    }

    pub fn apply(&self, v: &Point) -> f64 {
        self.coeffs.dot(v)
    }
}

/// The base `B = {k in K : e*(k) = 1}` of a pointed polyhedral cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBase {
    pub functional: DualFunctional,
    pub level: f64,
    /// max ||b|| over B in `norm`, attained at a vertex.
    pub radius: f64,
    pub norm: NormKind,
    /// Normalized generators `g / e*(g)`; B is their convex hull.
    pub vertices: Vec<Point>,
}

impl ConeBase {
    /// The unique multiple `k / e*(k)` of a nonzero cone element lying on B.
    pub fn project(&self, k: &Point) -> Option<Point> {
        let v = self.functional.apply(k);
        (v > 0.0).then(|| k.scale(1.0 / v))
    }

    /// Convex combination of the vertices with the given (unnormalized,
    /// nonnegative) weights.
    pub fn point(&self, weights: &[f64]) -> Point {
        let total: f64 = weights.iter().sum();
        let dim = self.vertices[0].dim();
        let mut acc = Point::zeros(dim);
        for (w, v) in weights.iter().zip(&self.vertices) {
            acc = acc.axpy(w / total, v);
        }
        acc
    }
}

/// Builds the base of `cone` cut out by `functional` at level 1.
pub fn base_of(cone: &PolyCone, functional: &DualFunctional, norm: NormKind) -> Result<ConeBase> {
    let completed;
    let gens = match cone.generators() {
        Some(g) => g,
        None => {
            completed = cone.completed()?;
            completed.generators().expect("completed")
        }
    };
    let mut vertices = Vec::with_capacity(gens.len());
    for (index, g) in gens.iter().enumerate() {
        let value = functional.apply(g);
        let scale = g.norm(NormKind::Two) * functional.coeffs().norm(NormKind::Two);
        if value <= 1e-14 * scale.max(1e-300) {
            return Err(Error::NoBase { cone: cone.name().to_string(), index, value });
        }
        vertices.push(g.scale(1.0 / value));
    }
    let radius = vertices.iter().map(|v| v.norm(norm)).fold(0.0, f64::max);
    Ok(ConeBase { functional: functional.clone(), level: 1.0, radius, norm, vertices })
}

/// The least-norm `y*` with `y*(g) >= 1` on every generator.
///
/// It exists exactly when the cone is pointed, and it is bounded below by 1
/// on the base it induces.
pub fn strictly_positive_functional(cone: &PolyCone) -> Result<DualFunctional> {
    let completed;
    let gens = match cone.generators() {
        Some(g) => g,
        None => {
            completed = cone.completed()?;
            completed.generators().expect("completed")
        }
    };
    if gens.is_empty() {
        return Err(Error::TrivialCone(cone.name().to_string()));
    }
    let y = least_distance(&refs(gens), &vec![1.0; gens.len()]).ok_or_else(|| Error::NotPointed(cone.name().to_string()))?;
    let y: Vec<f64> = y.into_iter().map(|v| if v.abs() < 1e-14 { 0.0 } else { v }).collect();
    Ok(DualFunctional { coeffs: Point::new(y)?, cone: cone.name().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn l1_orthant_simplex_base() {
        for n in [2, 5, 10] {
            let k = PolyCone::orthant(n, NormKind::One).unwrap();
            let e = DualFunctional::new(Point::filled(n, 1.0), &k, 0.0).unwrap();
            let b = base_of(&k, &e, NormKind::One).unwrap();
            assert_eq!(b.radius, 1.0);
            assert_eq!(b.level, 1.0);
        }
    }

    #[test]
    fn planar_orthant_base_sup_norm() {
        let k = PolyCone::orthant(2, NormKind::Sup).unwrap();
        let e = DualFunctional::new(p(&[1.0, 1.0]), &k, 0.0).unwrap();
        let b = base_of(&k, &e, NormKind::Sup).unwrap();
        assert_eq!(b.radius, 1.0);
        assert_eq!(b.vertices, vec![p(&[1.0, 0.0]), p(&[0.0, 1.0])]);
    }

    #[test]
    fn two_rays_base_by_vertex_enumeration() {
        let k = PolyCone::from_generators("two-rays", vec![p(&[1.0, 0.0]), p(&[1.0, 1.0])], NormKind::Two).unwrap();
        let e = DualFunctional::new(p(&[1.0, 0.0]), &k, 0.0).unwrap();
        for norm in [NormKind::Sup, NormKind::One, NormKind::Two] {
            let b = base_of(&k, &e, norm).unwrap();
            // Vertices (1,0)/1 and (1,1)/1.
            let expected = norm.apply(&[1.0, 0.0]).max(norm.apply(&[1.0, 1.0]));
            assert_eq!(b.radius, expected);
        }
        let bad = DualFunctional::new(p(&[0.0, 1.0]), &k, 0.0).unwrap();
        assert!(matches!(base_of(&k, &bad, NormKind::Two), Err(Error::NoBase { index: 0, .. })));
    }

    #[test]
    fn functional_outside_dual_rejected() {
        let k = PolyCone::orthant(2, NormKind::Two).unwrap();
        assert!(matches!(DualFunctional::new(p(&[1.0, -0.5]), &k, 0.0), Err(Error::NotInDual(_))));
        assert!(DualFunctional::new(p(&[0.0, 0.0]), &k, 0.0).is_ok());
        let d = PolyCone::from_dual("d", vec![p(&[1.0, 0.0]), p(&[1.0, 1.0])], NormKind::Two).unwrap();
        assert!(DualFunctional::new(p(&[2.0, 1.0]), &d, 1e-12).is_ok());
        assert!(DualFunctional::new(p(&[0.0, 1.0]), &d, 1e-12).is_err());
    }

    #[test]
    fn strictly_positive_examples() {
        let o = PolyCone::orthant(4, NormKind::Two).unwrap();
        let y = strictly_positive_functional(&o).unwrap();
        for v in y.coeffs().coords() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let k = PolyCone::from_generators("two-rays", vec![p(&[1.0, 0.0]), p(&[1.0, 1.0])], NormKind::Two).unwrap();
        let y = strictly_positive_functional(&k).unwrap();
        // Oracle: direct inequality check.
        assert!(y.coeffs()[0] >= 1.0 - 1e-12);
        assert!(y.coeffs()[0] + y.coeffs()[1] >= 1.0 - 1e-12);
    }

    #[test]
    fn base_points_lie_on_level_one() {
        let k = PolyCone::from_generators(
            "k3",
            vec![p(&[1.0, 0.2, 0.0]), p(&[0.0, 1.0, 0.3]), p(&[0.4, 0.0, 1.0]), p(&[1.0, 1.0, 1.0])],
            NormKind::Two,
        )
        .unwrap();
        let e = strictly_positive_functional(&k).unwrap();
        let b = base_of(&k, &e, NormKind::Two).unwrap();
        let mut rng = sampling::rng(4);
        for _ in 0..1000 {
            let w: Vec<f64> = (0..4).map(|_| sampling::exponential(&mut rng)).collect();
            let pt = b.point(&w);
            assert!((e.apply(&pt) - 1.0).abs() < 1e-12);
            assert!(pt.norm(NormKind::Two) <= b.radius + 1e-12);
            assert!(k.contains(&pt, 1e-9).unwrap());
        }
    }
}

//! Ordered finite-dimensional vector spaces.
//!
//! A [`PolyCone`] is a closed convex polyhedral cone `K` in R^d given by
//! generators (`K = cone{g_i}`), by inequality functionals
//! (`K = {v : a_j . v >= 0}`), or both. It induces the order
//! `x <=_K y  <=>  y - x in K`. Dual generators are stored normalized to unit
//! Euclidean length; this does not change the cone and makes `a_j . v` a
//! comparable margin across cones.

mod base;
pub mod feasibility;
mod point;

pub use base::{base_of, strictly_positive_functional, ConeBase, DualFunctional};
pub use point::{NormKind, Point};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling;
use feasibility::{least_distance, nnls, null_space, rank};

/// Largest dimension handled by dual ray enumeration.
pub const MAX_ENUMERATION_DIM: usize = 4;

const MAX_ENUMERATION_SUBSETS: usize = 200_000;

/// Which representation a membership query goes through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Generators,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyCone {
    name: String,
    dim: usize,
    norm: NormKind,
    generators: Option<Vec<Point>>,
    dual_generators: Option<Vec<Point>>,
    pointed: bool,
}

fn validate_set(set: &[Point], dim: usize, what: &str) -> Result<()> {
    for p in set {
        p.check_dim(dim)?;
        if p.norm(NormKind::Two) == 0.0 {
            return Err(Error::InvalidParameter(format!("zero vector among {what}")));
        }
    }
    Ok(())
}

fn normalize(set: Vec<Point>) -> Vec<Point> {
    set.into_iter()
        .map(|p| {
            let n = p.norm(NormKind::Two);
            p.scale(1.0 / n)
        })
        .collect()
}

pub(crate) fn refs(set: &[Point]) -> Vec<&[f64]> {
    set.iter().map(|p| p.coords()).collect()
}

fn generators_pointed(gens: &[Point]) -> bool {
    if gens.is_empty() {
        return true;
    }
    least_distance(&refs(gens), &vec![1.0; gens.len()]).is_some()
}

impl PolyCone {
    /// `K = cone{g_i}`.
    pub fn from_generators(name: impl Into<String>, generators: Vec<Point>, norm: NormKind) -> Result<Self> {
        let name = name.into();
        let dim = generators.first().map(Point::dim).ok_or_else(|| Error::DegenerateCone(name.clone()))?;
        validate_set(&generators, dim, "generators")?;
        let pointed = generators_pointed(&generators);
        Ok(PolyCone { name, dim, norm, generators: Some(generators), dual_generators: None, pointed })
    }

    /// `K = {v : a_j . v >= 0 for all j}`.
    pub fn from_dual(name: impl Into<String>, dual_generators: Vec<Point>, norm: NormKind) -> Result<Self> {
        let name = name.into();
        let dim = dual_generators
            .first()
            .map(Point::dim)
            .ok_or_else(|| Error::InvalidParameter(format!("cone `{name}`: empty dual generator set")))?;
        validate_set(&dual_generators, dim, "dual generators")?;
        let pointed = rank(&refs(&dual_generators), dim) == dim;
        Ok(PolyCone {
            name,
            dim,
            norm,
            generators: None,
            dual_generators: Some(normalize(dual_generators)),
            pointed,
        })
    }

    /// Both representations; they are trusted to describe the same cone
    /// (see [`PolyCone::representation_agreement`]).
    pub fn from_parts(
        name: impl Into<String>,
        generators: Vec<Point>,
        dual_generators: Vec<Point>,
        norm: NormKind,
    ) -> Result<Self> {
        let mut cone = Self::from_generators(name, generators, norm)?;
        if dual_generators.is_empty() {
            return Err(Error::InvalidParameter(format!("cone `{}`: empty dual generator set", cone.name)));
        }
        validate_set(&dual_generators, cone.dim, "dual generators")?;
        cone.dual_generators = Some(normalize(dual_generators));
        Ok(cone)
    }

    /// A seeded pointed full-dimensional cone with `dim + 2` rays clustered
    /// around the diagonal, and an interior element. Up to
    /// [`MAX_ENUMERATION_DIM`] it is given by generators; above, by
    /// inequality functionals.
    pub fn random_pointed(dim: usize, seed: u64) -> Result<(Self, Point)> {
        if dim == 0 {
            return Err(Error::InvalidParameter("cone of dimension 0".into()));
        }
        let mut rng = sampling::rng(seed);
        let diag = Point::filled(dim, 1.0 / (dim as f64).sqrt());
        let rays: Vec<Point> = (0..dim + 2)
            .map(|_| diag.axpy(0.6, &Point::from_vec_unchecked(sampling::unit_direction(&mut rng, dim, NormKind::Two))))
            .collect();
        let name = format!("random-{dim}-{seed}");
        if dim <= MAX_ENUMERATION_DIM {
            let k = rays.iter().fold(Point::zeros(dim), |acc, g| &acc + g);
            Ok((Self::from_generators(name, rays, NormKind::Two)?, k))
        } else {
            Ok((Self::from_dual(name, rays, NormKind::Two)?, diag))
        }
    }

    /// The nonnegative orthant R^dim_+ (self-dual, both representations).
    pub fn orthant(dim: usize, norm: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("orthant of dimension 0".into()));
        }
        let basis: Vec<Point> = (0..dim).map(|i| Point::basis(dim, i)).collect();
        Ok(PolyCone {
            name: format!("R^{dim}_+"),
            dim,
            norm,
            generators: Some(basis.clone()),
            dual_generators: Some(basis),
            pointed: true,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> NormKind {
        self.norm
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn generators(&self) -> Option<&[Point]> {
        self.generators.as_deref()
    }

    /// Unit-normalized inequality functionals.
    pub fn dual_generators(&self) -> Option<&[Point]> {
        self.dual_generators.as_deref()
    }

    pub fn is_pointed(&self) -> bool {
        self.pointed
    }

    /// True when the dual generators are exactly the standard basis.
    pub fn is_orthant(&self) -> bool {
        let Some(duals) = &self.dual_generators else { return false };
        if duals.len() != self.dim {
            return false;
        }
        let mut seen = vec![false; self.dim];
        for a in duals {
            let hits: Vec<usize> = (0..self.dim).filter(|&i| a[i] != 0.0).collect();
            if hits.len() != 1 || a[hits[0]] != 1.0 || seen[hits[0]] {
                return false;
            }
            seen[hits[0]] = true;
        }
        true
    }

    /// A copy carrying both representations, filling the missing one by ray
    /// enumeration.
    pub fn completed(&self) -> Result<PolyCone> {
        let mut out = self.with_inequalities()?;
        if out.generators.is_none() {
            let duals = out.dual_generators.as_deref().expect("checked above");
            let rays = enumerate_dual_rays(&out.name, duals, out.dim)?;
            if rays.is_empty() {
                return Err(Error::TrivialCone(out.name.clone()));
            }
            out.pointed = generators_pointed(&rays);
            out.generators = Some(rays);
        }
        Ok(out)
    }

    /// A copy carrying the inequality form, enumerated from the generators
    /// when missing. The generator form is left as given.
    pub fn with_inequalities(&self) -> Result<PolyCone> {
        let mut out = self.clone();
        if out.dual_generators.is_none() {
            let gens = out.generators.as_deref().ok_or_else(|| Error::NoRepresentation(out.name.clone()))?;
            let rays = enumerate_dual_rays(&out.name, gens, out.dim)?;
            if rays.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "cone `{}` is the whole space; it has no inequality form",
                    out.name
                )));
            }
            out.dual_generators = Some(normalize(rays));
        }
        Ok(out)
    }

    fn check_dim(&self, v: &Point) -> Result<()> {
        v.check_dim(self.dim)
    }

    /// Membership up to `tol`; the inequality form is used when available.
    pub fn contains(&self, v: &Point, tol: f64) -> Result<bool> {
        let repr = if self.dual_generators.is_some() { Representation::Dual } else { Representation::Generators };
        self.contains_with(repr, v, tol)
    }

    /// Membership through a specific representation.
    ///
    /// Dual form: every `a_j . v >= -tol`. Generator form: the non-negative
    /// least-squares residual of `v` against the generators is `<= tol`.
    pub fn contains_with(&self, repr: Representation, v: &Point, tol: f64) -> Result<bool> {
        self.check_dim(v)?;
        if tol < 0.0 || !tol.is_finite() {
            return Err(Error::InvalidParameter(format!("tolerance {tol} must be finite and >= 0")));
        }
        match repr {
            Representation::Dual => {
                let duals = self.dual_generators.as_deref().ok_or_else(|| Error::NoRepresentation(self.name.clone()))?;
                Ok(duals.iter().all(|a| a.dot(v) >= -tol))
            }
            Representation::Generators => {
                let gens = self.generators.as_deref().ok_or_else(|| Error::NoRepresentation(self.name.clone()))?;
                Ok(nnls(&refs(gens), v.coords()).residual <= tol)
            }
        }
    }

    /// Signed distance-like margin: `min_j a_j . v` in dual form, otherwise
    /// minus the generator residual. `v in K` iff the margin is `>= 0`.
    pub fn margin(&self, v: &Point) -> Result<f64> {
        self.check_dim(v)?;
        if let Some(duals) = &self.dual_generators {
            return Ok(duals.iter().map(|a| a.dot(v)).fold(f64::INFINITY, f64::min));
        }
        let gens = self.generators.as_deref().ok_or_else(|| Error::NoRepresentation(self.name.clone()))?;
        Ok(-nnls(&refs(gens), v.coords()).residual)
    }

    /// `x <=_K y`.
    pub fn leq(&self, x: &Point, y: &Point, tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        self.contains(&(y - x), tol)
    }

    /// The dual cone `K* = {y : y . k >= 0 for all k in K}`.
    ///
    /// When `K` has an inequality form, `K*` is generated by it. Otherwise the
    /// extreme rays are enumerated from active generator subsets, which is
    /// supported up to [`MAX_ENUMERATION_DIM`].
    pub fn dual_cone(&self) -> Result<PolyCone> {
        let name = format!("{}*", self.name);
        if let Some(duals) = &self.dual_generators {
            let pointed = generators_pointed(duals);
            return Ok(PolyCone {
                name,
                dim: self.dim,
                norm: self.norm,
                generators: Some(duals.clone()),
                dual_generators: self.generators.clone().map(normalize),
                pointed,
            });
        }
        let gens = self.generators.as_deref().ok_or_else(|| Error::NoRepresentation(self.name.clone()))?;
        let rays = enumerate_dual_rays(&self.name, gens, self.dim)?;
        if rays.is_empty() {
            return Err(Error::TrivialCone(name));
        }
        let pointed = generators_pointed(&rays);
        Ok(PolyCone {
            name,
            dim: self.dim,
            norm: self.norm,
            generators: Some(rays),
            dual_generators: Some(normalize(gens.to_vec())),
            pointed,
        })
    }

    /// Whether the generators span R^dim.
    pub fn is_full_dimensional(&self) -> bool {
        match (&self.generators, &self.dual_generators) {
            (Some(g), _) => rank(&refs(g), self.dim) == self.dim,
            (None, Some(d)) => generators_pointed(d),
            (None, None) => false,
        }
    }

    /// `k in int K`, i.e. every inequality functional is `> tol` at `k`.
    /// Only defined for full-dimensional cones.
    pub fn relative_interior_contains(&self, k: &Point, tol: f64) -> Result<bool> {
        self.check_dim(k)?;
        if !self.is_full_dimensional() {
            return Err(Error::NotFullDimensional(self.name.clone()));
        }
        let completed;
        let duals = match &self.dual_generators {
            Some(d) => d,
            None => {
                completed = self.with_inequalities()?;
                completed.dual_generators.as_ref().expect("completed")
            }
        };
        Ok(duals.iter().all(|a| a.dot(k) > tol))
    }

    /// Sampled lower estimate of the normality constant
    /// `gamma = sup { ||x|| / ||y|| : 0 <=_K x <=_K y, y != 0 }`.
    ///
    /// The pair `x = y` is always included, so the estimate is at least 1.
    /// Extending the budget under a fixed seed only appends samples, so the
    /// estimate is nondecreasing in `budget`.
    pub fn normality_constant(&self, norm: NormKind, budget: usize, seed: u64) -> Result<f64> {
        if budget == 0 {
            return Err(Error::InvalidParameter("budget must be >= 1".into()));
        }
        let completed;
        let gens = match &self.generators {
            Some(g) => g.as_slice(),
            None => {
                completed = self.completed()?;
                completed.generators.as_deref().expect("completed")
            }
        };
        if gens.is_empty() {
            return Err(Error::TrivialCone(self.name.clone()));
        }
        let mut best = 1.0_f64;
        let mut rng = sampling::rng(seed);
        let draw = |rng: &mut sampling::SeededRng| -> Vec<f64> {
            gens.iter()
                .map(|_| {
                    if rand::Rng::gen::<bool>(rng) {
                        0.0
                    } else {
                        sampling::exponential(rng)
                    }
                })
                .collect()
        };
        let combine = |coef: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; self.dim];
            for (c, g) in coef.iter().zip(gens) {
                for i in 0..self.dim {
                    v[i] += c * g[i];
                }
            }
            v
        };
        for _ in 1..budget {
            let x = combine(&draw(&mut rng));
            let z = combine(&draw(&mut rng));
            let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            let ny = norm.apply(&y);
            if ny > 1e-300 {
                best = best.max(norm.apply(&x) / ny);
            }
        }
        Ok(best)
    }

    /// Fraction of the sampled points on which the two representations
    /// agree. Only meaningful when both are present.
    pub fn representation_agreement(&self, samples: usize, seed: u64, tol: f64) -> Result<f64> {
        if self.generators.is_none() || self.dual_generators.is_none() {
            return Err(Error::NoRepresentation(self.name.clone()));
        }
        let mut rng = sampling::rng(seed);
        let mut agree = 0usize;
        for _ in 0..samples {
            let v = Point::from_vec_unchecked((0..self.dim).map(|_| sampling::standard_normal(&mut rng)).collect());
            let a = self.contains_with(Representation::Dual, &v, tol)?;
            let b = self.contains_with(Representation::Generators, &v, tol)?;
            if a == b {
                agree += 1;
            }
        }
        Ok(agree as f64 / samples.max(1) as f64)
    }
}

/// Extreme rays (plus lineality directions) of `{y : y . g >= 0 for all g}`.
fn enumerate_dual_rays(name: &str, gens: &[Point], dim: usize) -> Result<Vec<Point>> {
    if dim > MAX_ENUMERATION_DIM {
        return Err(Error::DualEnumerationLimit { name: name.to_string(), dim, max: MAX_ENUMERATION_DIM });
    }
    let g = refs(gens);
    let r = rank(&g, dim);
    if r == 0 {
        return Err(Error::DegenerateCone(name.to_string()));
    }
    let lineality = null_space(&g, dim);
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for n in &lineality {
        rays.push(n.clone());
        rays.push(n.iter().map(|v| -v).collect());
    }

    let subsets = combinations(gens.len(), r - 1);
    if subsets.len() > MAX_ENUMERATION_SUBSETS {
        return Err(Error::InvalidParameter(format!("cone `{name}` has too many generators for ray enumeration")));
    }
    let scale = gens.iter().map(|p| p.norm(NormKind::Two)).fold(0.0, f64::max);
    let eps = 1e-10 * scale.max(1.0);
    for subset in subsets {
        let mut rows: Vec<&[f64]> = subset.iter().map(|&i| g[i]).collect();
        rows.extend(lineality.iter().map(|v| v.as_slice()));
        if rank(&rows, dim) != dim - 1 {
            continue;
        }
        let ns = null_space(&rows, dim);
        let Some(y) = ns.into_iter().next() else { continue };
        let candidate = if g.iter().all(|gi| feasibility::dot(gi, &y) >= -eps) {
            y
        } else if g.iter().all(|gi| feasibility::dot(gi, &y) <= eps) {
            y.iter().map(|v| -v).collect()
        } else {
            continue;
        };
        let candidate = tidy_ray(candidate);
        let duplicate = rays.iter().any(|ray| {
            let a = unit(ray);
            let b = unit(&candidate);
            a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9)
        });
        if !duplicate {
            rays.push(candidate);
        }
    }
    Ok(rays.into_iter().map(Point::from_vec_unchecked).collect())
}

/// Scales a ray to max-abs coordinate 1 and flushes rounding noise.
fn tidy_ray(mut v: Vec<f64>) -> Vec<f64> {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for x in v.iter_mut() {
        *x /= m;
        if x.abs() < 1e-13 {
            *x = 0.0;
        } else if (x.abs() - 1.0).abs() < 1e-13 {
            *x = x.signum();
        }
    }
    v
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = feasibility::norm2(v);
    v.iter().map(|x| x / n).collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        if out.len() > MAX_ENUMERATION_SUBSETS {
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn two_rays() -> PolyCone {
        PolyCone::from_generators("two-rays", vec![p(&[1.0, 0.0]), p(&[1.0, 1.0])], NormKind::Sup).unwrap()
    }

    #[test]
    fn orthant_membership() {
        let k = PolyCone::orthant(2, NormKind::Sup).unwrap();
        assert!(k.contains(&p(&[1.0, 2.0]), 0.0).unwrap());
        assert!(!k.contains(&p(&[-1.0, 0.0]), 0.0).unwrap());
        assert!(k.is_orthant());
        assert!(k.is_pointed());
    }

    #[test]
    fn generator_membership_matches_coefficient_grid() {
        let k = two_rays();
        assert!(k.contains(&p(&[2.0, 1.0]), 1e-12).unwrap());
        // Oracle: v = a (1,0) + b (1,1) on a coefficient grid.
        let mut found = false;
        for i in 0..=40 {
            for j in 0..=40 {
                let (a, b) = (i as f64 * 0.1, j as f64 * 0.1);
                if ((a + b) - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 {
                    found = true;
                    assert!((a - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!(found);
        assert!(!k.contains(&p(&[1.0, 2.0]), 1e-9).unwrap());
    }

    #[test]
    fn dimension_mismatch_and_missing_representation() {
        let k = two_rays();
        assert!(matches!(k.contains(&p(&[1.0]), 0.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            k.contains_with(Representation::Dual, &p(&[1.0, 0.0]), 0.0),
            Err(Error::NoRepresentation(_))
        ));
    }

    #[test]
    fn order_examples() {
        let k = PolyCone::orthant(2, NormKind::Sup).unwrap();
        assert!(k.leq(&p(&[0.0, 0.0]), &p(&[1.0, 1.0]), 0.0).unwrap());
        assert!(k.leq(&p(&[0.3, -2.0]), &p(&[0.3, -2.0]), 0.0).unwrap());
        assert!(!k.leq(&p(&[0.0, 1.0]), &p(&[1.0, 0.0]), 0.0).unwrap());
        assert!(!k.leq(&p(&[1.0, 0.0]), &p(&[0.0, 1.0]), 0.0).unwrap());
        let g = two_rays();
        let x = p(&[0.2, 0.7]);
        assert!(g.leq(&x, &x, 0.0).unwrap());
    }

    #[test]
    fn dual_of_two_rays() {
        let d = two_rays().dual_cone().unwrap();
        let gens = d.generators().unwrap();
        assert_eq!(gens.len(), 2);
        let expected = [[0.0, 1.0], [1.0, -1.0]];
        for e in expected {
            assert!(
                gens.iter().any(|g| (g[0] - e[0]).abs() < 1e-12 && (g[1] - e[1]).abs() < 1e-12),
                "{gens:?}"
            );
        }
        // Oracle: y in K* iff y.g >= 0 for both generators; dense direction grid.
        for i in 0..720 {
            let th = i as f64 * std::f64::consts::PI / 360.0;
            let y = p(&[th.cos(), th.sin()]);
            let oracle = y[0] >= -1e-12 && y[0] + y[1] >= -1e-12;
            let inside = d.contains_with(Representation::Generators, &y, 1e-9).unwrap();
            if (y[0]).abs() > 1e-6 && (y[0] + y[1]).abs() > 1e-6 {
                assert_eq!(oracle, inside, "direction {th}");
            }
        }
    }

    #[test]
    fn orthant_self_dual() {
        for n in [2, 3] {
            let k = PolyCone::from_generators("o", (0..n).map(|i| Point::basis(n, i)).collect(), NormKind::Two).unwrap();
            let d = k.dual_cone().unwrap();
            let mut gens: Vec<Vec<f64>> = d.generators().unwrap().iter().map(|g| g.coords().to_vec()).collect();
            gens.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let expected: Vec<Vec<f64>> = (0..n).map(|i| Point::basis(n, i).into_vec()).collect();
            assert_eq!(gens, expected);
        }
    }

    #[test]
    fn dual_of_non_full_dimensional_cone_has_lineality() {
        let k = PolyCone::from_generators("ray", vec![p(&[1.0, 0.0])], NormKind::Two).unwrap();
        let d = k.dual_cone().unwrap();
        assert!(!d.is_pointed());
        assert!(d.contains(&p(&[0.0, -5.0]), 1e-12).unwrap());
        assert!(d.contains(&p(&[2.0, 5.0]), 1e-12).unwrap());
        assert!(!d.contains(&p(&[-1.0, 0.0]), 1e-12).unwrap());
    }

    #[test]
    fn dual_enumeration_limit() {
        let gens: Vec<Point> = (0..5).map(|i| Point::basis(5, i)).collect();
        let k = PolyCone::from_generators("five", gens, NormKind::Two).unwrap();
        assert!(matches!(k.dual_cone(), Err(Error::DualEnumerationLimit { .. })));
        let o = PolyCone::orthant(5, NormKind::Two).unwrap();
        assert!(o.dual_cone().is_ok());
    }

    #[test]
    fn halfplane_is_not_pointed() {
        let k = PolyCone::from_generators(
            "halfplane",
            vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0])],
            NormKind::Two,
        )
        .unwrap();
        assert!(!k.is_pointed());
        assert!(matches!(strictly_positive_functional(&k), Err(Error::NotPointed(_))));
    }

    #[test]
    fn relative_interior() {
        let o = PolyCone::orthant(2, NormKind::Sup).unwrap();
        assert!(o.relative_interior_contains(&p(&[1.0, 1.0]), 0.0).unwrap());
        assert!(!o.relative_interior_contains(&p(&[1.0, 0.0]), 0.0).unwrap());
        assert!(two_rays().relative_interior_contains(&p(&[1.0, 0.5]), 0.0).unwrap());
        let ray = PolyCone::from_generators("ray", vec![p(&[1.0, 0.0])], NormKind::Two).unwrap();
        assert!(matches!(ray.relative_interior_contains(&p(&[1.0, 0.0]), 0.0), Err(Error::NotFullDimensional(_))));
    }

    #[test]
    fn normality_constant_orthants() {
        for norm in [NormKind::Sup, NormKind::One, NormKind::Two] {
            let k = PolyCone::orthant(3, norm).unwrap();
            let g = k.normality_constant(norm, 2000, 5).unwrap();
            assert!((g - 1.0).abs() <= 1e-12, "{norm:?}: {g}");
        }
    }

    #[test]
    fn normality_constant_two_rays_matches_grid() {
        // Oracle: grid over x = a(1,0)+b(1,1), z = c(1,0)+d(1,1), y = x + z.
        let mut grid_best = 0.0_f64;
        let steps: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
        for &a in &steps {
            for &b in &steps {
                for &c in &steps {
                    for &d in &steps {
                        let x = [a + b, b];
                        let y = [a + b + c + d, b + d];
                        let ny = NormKind::Sup.apply(&y);
                        if ny > 0.0 {
                            grid_best = grid_best.max(NormKind::Sup.apply(&x) / ny);
                        }
                    }
                }
            }
        }
        assert_eq!(grid_best, 1.0);
        let g = two_rays().normality_constant(NormKind::Sup, 5000, 1).unwrap();
        assert!(g >= 1.0);
        assert!((g - grid_best).abs() < 1e-12);
    }

    #[test]
    fn normality_constant_obtuse_cone_exceeds_one() {
        // x = (1,0), y = x + (-1,1)/2 = (1/2,1/2) gives ratio sqrt(2), the supremum.
        let k = PolyCone::from_generators("obtuse", vec![p(&[1.0, 0.0]), p(&[-1.0, 1.0])], NormKind::Two).unwrap();
        let g = k.normality_constant(NormKind::Two, 4000, 2).unwrap();
        assert!(g > 1.3 && g <= 2f64.sqrt() + 1e-12, "{g}");
    }

    #[test]
    fn normality_estimate_nondecreasing_in_budget() {
        let k = PolyCone::from_generators("obtuse", vec![p(&[1.0, 0.0]), p(&[-1.0, 1.0])], NormKind::Two).unwrap();
        let mut prev = 0.0;
        for budget in [1, 10, 100, 1000] {
            let g = k.normality_constant(NormKind::Two, budget, 9).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn trivial_cone_errors() {
        assert!(matches!(PolyCone::from_generators("e", vec![], NormKind::Two), Err(Error::DegenerateCone(_))));
        assert!(PolyCone::from_generators("z", vec![p(&[0.0, 0.0])], NormKind::Two).is_err());
    }

    #[test]
    fn completed_dual_only_cone() {
        let k = PolyCone::from_dual("dual-form", vec![p(&[0.0, 1.0]), p(&[1.0, -1.0])], NormKind::Two).unwrap();
        let c = k.completed().unwrap();
        assert!(c.is_pointed());
        assert!(c.representation_agreement(1000, 3, 1e-9).unwrap() == 1.0);
    }

    #[test]
    fn random_pointed_cones_hold_their_k() {
        for dim in 1..=6 {
            let (k, e) = PolyCone::random_pointed(dim, 4).unwrap();
            assert!(k.is_pointed() && k.is_full_dimensional());
            assert!(k.relative_interior_contains(&e, 1e-9).unwrap());
            assert_eq!(k.generators().is_some(), dim <= MAX_ENUMERATION_DIM);
        }
        assert_eq!(PolyCone::random_pointed(3, 8).unwrap().0, PolyCone::random_pointed(3, 8).unwrap().0);
    }

    #[test]
    fn with_inequalities_keeps_generators_absent() {
        let (k, _) = PolyCone::random_pointed(5, 1).unwrap();
        let w = k.with_inequalities().unwrap();
        assert!(w.generators().is_none() && w.dual_generators().is_some());
        assert!(k.completed().is_err());
    }
}

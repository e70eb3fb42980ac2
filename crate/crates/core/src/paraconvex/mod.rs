//! Checkers and falsifiers for paraconvexity-type inequalities.

mod falsify;
mod local;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::{DualFunctional, NormKind, Point, PolyCone};
use crate::error::{Error, Result};
use crate::mapping::{DomainBox, VectorMapping};
use crate::modulus::ParaSpec;
use crate::report::{CheckReport, SampleTriple, Witness};
use crate::sampling;

pub use falsify::{dyadic_schedule, falsify, FalsifyOptions};
pub use local::{check_approx_convex, check_fact2, check_local_vector_bounded, check_vector_lipschitz};
pub(crate) use local::{lipschitz_on_pairs, lipschitz_pairs};

/// Default checker tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Which weight multiplies `alpha(||x - y||) k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `C min{lambda, 1 - lambda}`
    #[default]
    Min,
    /// `C1 lambda (1 - lambda)`
    Lambda,
}

impl Form {
    /// The weight for `spec` at `lambda`.
    pub fn weight(self, spec: &ParaSpec, lambda: f64) -> f64 {
        match self {
            Form::Min => spec.c * lambda.min(1.0 - lambda),
            Form::Lambda => spec.c1 * lambda * (1.0 - lambda),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Form::Min => "min",
            Form::Lambda => "lambda",
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Form::Min),
            "lambda" => Ok(Form::Lambda),
            other => Err(Error::InvalidParameter(format!("unknown form '{other}' (expected min or lambda)"))),
        }
    }
}

/// A seeded batch of triples shared between checkers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleSet {
    pub seed: u64,
    pub triples: Vec<SampleTriple>,
}

impl TripleSet {
    /// `budget` triples with `x, y` uniform in the box and `lambda` uniform
    /// in `[0, 1]`.
    pub fn uniform(domain: &DomainBox, budget: usize, seed: u64) -> Self {
        let mut rng = sampling::rng(seed);
        let triples = (0..budget)
            .map(|_| {
                let x = Point::from_vec_unchecked(domain.sample(&mut rng));
                let y = Point::from_vec_unchecked(domain.sample(&mut rng));
                let lambda = rand::Rng::gen_range(&mut rng, 0.0..=1.0);
                SampleTriple::new(x, y, lambda)
            })
            .collect();
        TripleSet { seed, triples }
    }

    pub fn from_triples(seed: u64, triples: Vec<SampleTriple>) -> Self {
        TripleSet { seed, triples }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// A seeded batch of point pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSet {
    pub seed: u64,
    pub pairs: Vec<(Point, Point)>,
}

impl PairSet {
    pub fn uniform(domain: &DomainBox, budget: usize, seed: u64) -> Self {
        let mut rng = sampling::rng(seed);
        let pairs = (0..budget)
            .map(|_| {
                let x = Point::from_vec_unchecked(domain.sample(&mut rng));
                let y = Point::from_vec_unchecked(domain.sample(&mut rng));
                (x, y)
            })
            .collect();
        PairSet { seed, pairs }
    }
}

/// Spec and mapping checked against each other, with the cone's inequality
/// form available.
pub(crate) struct Prepared {
    pub cone: PolyCone,
}

impl Prepared {
    pub(crate) fn new(f: &VectorMapping, spec: &ParaSpec) -> Result<Self> {
        if spec.cone.dim() != f.codomain_dim() {
            return Err(Error::DimensionMismatch { expected: f.codomain_dim(), got: spec.cone.dim() });
        }
        spec.k.check_dim(f.codomain_dim())?;
        if !spec.cone.contains(&spec.k, 1e-12)? {
            return Err(Error::KOutsideCone { cone: spec.cone.name().to_string(), k: spec.k.coords().to_vec() });
        }
        Ok(Prepared { cone: spec.cone.with_inequalities()? })
    }

    pub(crate) fn duals(&self) -> &[Point] {
        self.cone.dual_generators().expect("completed cone")
    }

    /// `min_j a_j . v` over the normalized inequality functionals.
    pub(crate) fn margin(&self, v: &Point) -> f64 {
        self.duals().iter().map(|a| a.dot(v)).fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn norm(&self) -> NormKind {
        self.cone.norm()
    }
}

pub(crate) fn check_triple(f: &VectorMapping, t: &SampleTriple) -> Result<()> {
    for p in [&t.x, &t.y] {
        p.check_dim(f.domain_dim())?;
        if !f.domain().contains(p.coords()) {
            return Err(Error::OutsideDomain { point: p.coords().to_vec() });
        }
    }
    if !(0.0..=1.0).contains(&t.lambda) {
        return Err(Error::InvalidParameter(format!("lambda = {} outside [0, 1]", t.lambda)));
    }
    Ok(())
}

/// The vector slack of one triple and the magnitude scale
/// `1 + ||f(x)|| + ||f(y)||`.
pub(crate) fn slack(f: &VectorMapping, spec: &ParaSpec, form: Form, norm: NormKind, t: &SampleTriple) -> Result<(Point, f64)> {
    check_triple(f, t)?;
    let fx = f.eval(&t.x)?;
    let fy = f.eval(&t.y)?;
    let fm = f.eval(&t.mix())?;
    let gap = t.x.distance(&t.y, f.domain_norm());
    let w = form.weight(spec, t.lambda);
    let corr = if w == 0.0 { 0.0 } else { w * spec.modulus.eval(gap)? };
    let s = &fx.convex_combination(t.lambda, &fy).axpy(corr, &spec.k) - &fm;
    Ok((s, 1.0 + fx.norm(norm) + fy.norm(norm)))
}

/// Margin of one triple in the scalarized metric.
pub(crate) fn triple_margin(f: &VectorMapping, spec: &ParaSpec, form: Form, prep: &Prepared, t: &SampleTriple) -> Result<f64> {
    let (s, scale) = slack(f, spec, form, prep.norm(), t)?;
    Ok(prep.margin(&s) / scale)
}

/// Checks `lambda f(x) + (1-lambda) f(y) + c(lambda) alpha(||x-y||) k - f(mix)`
/// in `K` on every triple. The margin of a triple is the least normalized
/// inequality functional of the slack, divided by `1 + ||f(x)|| + ||f(y)||`.
pub fn check_inequality(f: &VectorMapping, spec: &ParaSpec, form: Form, samples: &TripleSet, tol: f64) -> Result<CheckReport> {
    let prep = Prepared::new(f, spec)?;
    let mut report = CheckReport::new(tol, samples.seed);
    for t in &samples.triples {
        let m = triple_margin(f, spec, form, &prep, t)?;
        report.observe(m, || Witness::Triple(t.clone()));
    }
    Ok(report.finish())
}

/// Checks the scalar inequality of `y* o f` with constant `C y*(k)` for each
/// functional on the shared triples. Functionals are rescaled to unit l2
/// length; the zero functional contributes margin 0.
pub fn scalarize_check(
    f: &VectorMapping,
    spec: &ParaSpec,
    form: Form,
    functionals: &[DualFunctional],
    samples: &TripleSet,
    tol: f64,
) -> Result<CheckReport> {
    let prep = Prepared::new(f, spec)?;
    let mut units = Vec::with_capacity(functionals.len());
    for y in functionals {
        // Re-audit against this cone: the functional may have been built for another.
        let audited = DualFunctional::new(y.coeffs().clone(), &prep.cone, 1e-12)?;
        let n = audited.coeffs().norm(NormKind::Two);
        units.push(if n > 0.0 { audited.coeffs().scale(1.0 / n) } else { audited.coeffs().clone() });
    }
    let norm = prep.norm();
    let mut report = CheckReport::new(tol, samples.seed);
    for t in &samples.triples {
        check_triple(f, t)?;
        let fx = f.eval(&t.x)?;
        let fy = f.eval(&t.y)?;
        let fm = f.eval(&t.mix())?;
        let scale = 1.0 + fx.norm(norm) + fy.norm(norm);
        let gap = t.x.distance(&t.y, f.domain_norm());
        let w = form.weight(spec, t.lambda);
        let alpha = if w == 0.0 { 0.0 } else { spec.modulus.eval(gap)? };
        let mut worst = f64::INFINITY;
        for y in &units {
            let (gx, gy, gm) = (y.dot(&fx), y.dot(&fy), y.dot(&fm));
            let s = t.lambda * gx + (1.0 - t.lambda) * gy + w * y.dot(&spec.k) * alpha - gm;
            worst = worst.min(s / scale);
        }
        if units.is_empty() {
            worst = 0.0;
        }
        report.observe(worst, || Witness::Triple(t.clone()));
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mapping::{make_affine, make_semiconvex_scalar, PiecewiseLinear, SmoothPart};
    use crate::modulus::Modulus;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn neg_square() -> VectorMapping {
        make_semiconvex_scalar(PiecewiseLinear::zero(), SmoothPart::quadratic(-1.0, 0.0, 0.0), 1.0, DomainBox::symmetric(1, 1.0).unwrap())
            .unwrap()
    }

    fn scalar_spec(c: f64, c1: f64) -> ParaSpec {
        let cone = Arc::new(PolyCone::orthant(1, NormKind::Sup).unwrap());
        ParaSpec::new(Modulus::square(1.0), c, c1, p(&[1.0]), cone).unwrap()
    }

    #[test]
    fn affine_is_convex_with_zero_margin() {
        let f = make_affine(vec![vec![1.0, -2.0], vec![0.5, 3.0]], vec![1.0, -1.0], DomainBox::symmetric(2, 1.0).unwrap()).unwrap();
        let spec = f.claimed().unwrap().clone();
        let s = TripleSet::uniform(f.domain(), 2000, 1);
        for form in [Form::Min, Form::Lambda] {
            let r = check_inequality(&f, &spec, form, &s, 1e-12).unwrap();
            assert!(r.pass);
            assert!(r.worst_margin.abs() < 1e-12);
        }
    }

    #[test]
    fn neg_square_exact_constants() {
        let f = neg_square();
        let s = TripleSet::uniform(f.domain(), 10_000, 2);
        let r = check_inequality(&f, &scalar_spec(1.0, 1.0), Form::Min, &s, 1e-12).unwrap();
        assert!(r.pass);
        let r = check_inequality(&f, &scalar_spec(1.0, 1.0), Form::Lambda, &s, 1e-12).unwrap();
        assert!(r.pass);
        assert!(r.worst_margin.abs() < 1e-12);
        let r = check_inequality(&f, &scalar_spec(0.99, 0.99), Form::Lambda, &s, 1e-12).unwrap();
        assert!(!r.pass);
        let Some(Witness::Triple(w)) = r.witness else { panic!("triple witness expected") };
        // Oracle: the identity gives slack -0.01 lambda (1-lambda) (x-y)^2.
        let d = w.x[0] - w.y[0];
        let expected = -0.01 * w.lambda * (1.0 - w.lambda) * d * d;
        let scale = 1.0 + w.x[0] * w.x[0] + w.y[0] * w.y[0];
        assert!((r.worst_margin - expected / scale).abs() < 1e-14);
        assert!(d.abs() > 1.0 && (w.lambda - 0.5).abs() < 0.25);
    }

    #[test]
    fn grid_oracle_for_identity() {
        // Oracle: grid evaluation of both sides of the lambda-form identity.
        let f = neg_square();
        let spec = scalar_spec(1.0, 1.0);
        let mut triples = Vec::new();
        for i in 1..20 {
            for j in 1..20 {
                for l in 0..=4 {
                    let (x, y) = (-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64);
                    triples.push(SampleTriple::new(p(&[x]), p(&[y]), l as f64 / 4.0));
                }
            }
        }
        for t in &triples {
            let (x, y, l) = (t.x[0], t.y[0], t.lambda);
            let gap = l * (-x * x) + (1.0 - l) * (-y * y) + (l * x + (1.0 - l) * y).powi(2);
            assert!((gap + l * (1.0 - l) * (x - y).powi(2)).abs() < 1e-14);
        }
        let r = check_inequality(&f, &spec, Form::Lambda, &TripleSet::from_triples(0, triples), 1e-12).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn orthant_scalarization_is_identical() {
        let f = make_affine(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0], DomainBox::symmetric(1, 1.0).unwrap()).unwrap();
        let g = VectorMapping::from_fn("mixed", DomainBox::symmetric(1, 1.0).unwrap(), 2, |x| vec![-x[0] * x[0], x[0].abs()]).unwrap();
        let cone = Arc::new(PolyCone::orthant(2, NormKind::Sup).unwrap());
        let spec = ParaSpec::new(Modulus::square(1.0), 0.5, 0.5, p(&[1.0, 1.0]), cone.clone()).unwrap();
        let duals = DualFunctional::dual_generators_of(&cone).unwrap();
        let s = TripleSet::uniform(f.domain(), 1000, 3);
        for m in [&f, &g] {
            for form in [Form::Min, Form::Lambda] {
                let a = check_inequality(m, &spec, form, &s, 1e-9).unwrap();
                let b = scalarize_check(m, &spec, form, &duals, &s, 1e-9).unwrap();
                assert_eq!(a.pass, b.pass);
                assert!((a.worst_margin - b.worst_margin).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_functional_passes() {
        let f = neg_square();
        let spec = scalar_spec(0.0, 0.0);
        let zero = DualFunctional::new(p(&[0.0]), &spec.cone, 0.0).unwrap();
        let s = TripleSet::uniform(f.domain(), 100, 4);
        let r = scalarize_check(&f, &spec, Form::Min, &[zero], &s, 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.worst_margin, 0.0);
    }

    #[test]
    fn functional_for_another_cone_rejected() {
        let f = VectorMapping::from_fn("id", DomainBox::symmetric(2, 1.0).unwrap(), 2, |x| x.to_vec()).unwrap();
        let cone = Arc::new(
            PolyCone::from_generators("obtuse", vec![p(&[1.0, 0.0]), p(&[-1.0, 1.0])], NormKind::Two).unwrap(),
        );
        let spec = ParaSpec::new(Modulus::zero(), 0.0, 0.0, p(&[0.5, 1.0]), cone).unwrap();
        let orthant = PolyCone::orthant(2, NormKind::Two).unwrap();
        let y = DualFunctional::new(p(&[0.0, 1.0]), &orthant, 0.0).unwrap();
        // In the orthant's dual but negative on (-1, 1).
        let bad = DualFunctional::new(p(&[1.0, 0.0]), &orthant, 0.0).unwrap();
        let s = TripleSet::uniform(f.domain(), 10, 5);
        assert!(scalarize_check(&f, &spec, Form::Min, &[y], &s, 1e-9).is_ok());
        assert!(matches!(scalarize_check(&f, &spec, Form::Min, &[bad], &s, 1e-9), Err(Error::NotInDual(_))));
    }

    #[test]
    fn dimension_and_k_errors() {
        let f = neg_square();
        let cone = Arc::new(PolyCone::orthant(2, NormKind::Sup).unwrap());
        let spec = ParaSpec::new(Modulus::square(1.0), 1.0, 1.0, p(&[1.0, 1.0]), cone).unwrap();
        let s = TripleSet::uniform(f.domain(), 10, 6);
        assert!(matches!(check_inequality(&f, &spec, Form::Min, &s, 1e-9), Err(Error::DimensionMismatch { .. })));
        let mut bad = scalar_spec(1.0, 1.0);
        bad.k = p(&[-1.0]);
        assert!(matches!(check_inequality(&f, &bad, Form::Min, &s, 1e-9), Err(Error::KOutsideCone { .. })));
    }

    #[test]
    fn modulus_zero_is_cone_convexity() {
        let f = VectorMapping::from_fn("abs", DomainBox::symmetric(1, 1.0).unwrap(), 1, |x| vec![x[0].abs()]).unwrap();
        let cone = Arc::new(PolyCone::orthant(1, NormKind::Sup).unwrap());
        let spec = ParaSpec::new(Modulus::zero(), 5.0, 5.0, p(&[1.0]), cone).unwrap();
        let s = TripleSet::uniform(f.domain(), 1000, 7);
        assert!(check_inequality(&f, &spec, Form::Min, &s, 1e-12).unwrap().pass);
        let concave = VectorMapping::from_fn("neg-abs", DomainBox::symmetric(1, 1.0).unwrap(), 1, |x| vec![-x[0].abs()]).unwrap();
        assert!(!check_inequality(&concave, &spec, Form::Min, &s, 1e-12).unwrap().pass);
    }

    #[test]
    fn form_parse_round_trip() {
        for f in [Form::Min, Form::Lambda] {
            assert_eq!(f.as_str().parse::<Form>().unwrap(), f);
        }
        assert!("both".parse::<Form>().is_err());
    }
}

use std::sync::Arc;

use nalgebra::DMatrix;

use super::parts::{PiecewiseLinear, SmoothPart, SmoothTerm};
use super::{DomainBox, Evaluator, KinkLocus, VectorMapping};
use crate::cone::{NormKind, Point, PolyCone};
use crate::error::{Error, Result};
use crate::modulus::{Modulus, ParaSpec};

/// Grid size of the second-derivative audit over a 1-D domain.
pub const CURVATURE_AUDIT_POINTS: usize = 4001;

fn orthant_spec(m: usize, c: f64, k: Point) -> Result<ParaSpec> {
    let cone = Arc::new(PolyCone::orthant(m, NormKind::Sup)?);
    ParaSpec::new(Modulus::square(1.0), c, c, k, cone)
}

fn audit_component(component: usize, u1: &PiecewiseLinear, u2: &SmoothPart, c: f64, domain: &DomainBox) -> Result<()> {
    if let Some((position, before, after)) = u1.convexity_violation() {
        return Err(Error::NonConvex { component, position, before, after });
    }
    let (observed, at) = u2.curvature_sup(domain.lower()[0], domain.upper()[0], CURVATURE_AUDIT_POINTS);
    let bound = 2.0 * c;
    if observed > bound * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::CurvatureBound { component, at, observed, bound });
    }
    Ok(())
}

fn require_1d(domain: &DomainBox) -> Result<()> {
    if domain.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: domain.dim() });
    }
    Ok(())
}

fn check_constant(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C = {c} must be finite and >= 0")));
    }
    Ok(())
}

struct Affine {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Affine {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>()).collect()
    }
}

impl Evaluator for Affine {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x).into_iter().zip(&self.b).map(|(v, b)| v + b).collect()
    }

    fn directional(&self, _x0: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        Some(self.apply(h))
    }
}

/// `f(x) = A x + b`, claimed convex (`C = 0`) for the orthant with `k = 1`.
pub fn make_affine(a: Vec<Vec<f64>>, b: Vec<f64>, domain: DomainBox) -> Result<VectorMapping> {
    let m = b.len();
    if m == 0 || a.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: a.len() });
    }
    for row in &a {
        if row.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: row.len() });
        }
    }
    if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("affine coefficients"));
    }
    let spec = orthant_spec(m, 0.0, Point::filled(m, 1.0))?;
    VectorMapping::new("affine", domain, m, Arc::new(Affine { a, b }))?.with_claimed(spec)
}

struct Quadratic {
    q: Vec<Vec<Vec<f64>>>,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl Evaluator for Quadratic {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (0..self.q.len())
            .map(|i| {
                let mut v = self.c[i];
                for (r, row) in self.q[i].iter().enumerate() {
                    let qx: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                    v += x[r] * (0.5 * qx + self.b[i][r]);
                }
                v
            })
            .collect()
    }

    fn directional(&self, x0: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        Some(
            (0..self.q.len())
                .map(|i| {
                    self.q[i]
                        .iter()
                        .zip(&self.b[i])
                        .zip(h)
                        .map(|((row, b), hr)| hr * (row.iter().zip(x0).map(|(a, v)| a * v).sum::<f64>() + b))
                        .sum()
                })
                .collect(),
        )
    }
}

/// `f_i(x) = x^T Q_i x / 2 + b_i . x + c_i` on an l2 domain.
///
/// The claimed constant is the least `C` with `Q_i + 2 C k_i I` positive
/// semidefinite for all `i`, i.e. `max_i max(0, -lambda_min(Q_i) / 2) / k_i`.
pub fn make_quadratic(
    q: Vec<Vec<Vec<f64>>>,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
    k: Point,
    domain: DomainBox,
) -> Result<VectorMapping> {
    let m = q.len();
    let d = domain.dim();
    if m == 0 {
        return Err(Error::Empty("quadratic components"));
    }
    for (len, what) in [(b.len(), m), (c.len(), m), (k.dim(), m)] {
        if len != what {
            return Err(Error::DimensionMismatch { expected: what, got: len });
        }
    }
    let mut constant: f64 = 0.0;
    for i in 0..m {
        if q[i].len() != d || q[i].iter().any(|r| r.len() != d) || b[i].len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: q[i].len() });
        }
        let mat = DMatrix::from_fn(d, d, |r, s| q[i][r][s]);
        if !mat.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("quadratic coefficients"));
        }
        if (&mat - mat.transpose()).amax() > 1e-12 * (1.0 + mat.amax()) {
            return Err(Error::InvalidParameter(format!("Q_{i} is not symmetric")));
        }
        let lmin = mat.symmetric_eigen().eigenvalues.min();
        let need = (-0.5 * lmin).max(0.0);
        if need > 0.0 {
            if k[i] <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "component {i} is not convex, so k_{i} must be positive"
                )));
            }
            constant = constant.max(need / k[i]);
        }
    }
    let spec = orthant_spec(m, constant, k)?;
    VectorMapping::new("quadratic", domain, m, Arc::new(Quadratic { q, b, c }))?
        .with_domain_norm(NormKind::Two)
        .with_claimed(spec)
}

struct Scalar {
    u1: PiecewiseLinear,
    u2: SmoothPart,
}

impl Evaluator for Scalar {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        vec![self.u1.eval(x[0]) + self.u2.value(x[0])]
    }

    fn directional(&self, x0: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.u1.directional(x0[0], h[0]) + self.u2.d1(x0[0]) * h[0]])
    }
}

/// `f = u1 + u2` with `u1` convex piecewise linear and `|u2''| <= 2C`,
/// claimed strongly paraconvex with `alpha = t^2` and constant `C`.
pub fn make_semiconvex_scalar(u1: PiecewiseLinear, u2: SmoothPart, c: f64, domain: DomainBox) -> Result<VectorMapping> {
    require_1d(&domain)?;
    check_constant(c)?;
    audit_component(0, &u1, &u2, c, &domain)?;
    let locus = KinkLocus { axis: 0, coords: u1.positions().collect() };
    let spec = orthant_spec(1, c, Point::filled(1, 1.0))?;
    VectorMapping::new("semiconvex", domain, 1, Arc::new(Scalar { u1, u2 }))?
        .with_kink_locus(locus)
        .with_claimed(spec)
}

/// A piecewise-linear scalar with no convexity requirement and no claim.
pub fn make_piecewise_scalar(u: PiecewiseLinear, domain: DomainBox) -> Result<VectorMapping> {
    require_1d(&domain)?;
    let locus = KinkLocus { axis: 0, coords: u.positions().collect() };
    Ok(VectorMapping::new("piecewise", domain, 1, Arc::new(Scalar { u1: u, u2: SmoothPart::zero() }))?
        .with_kink_locus(locus))
}

/// Truncated construction `f(x) = (f_1(x) k_1, ..., f_n(x) k_n)` with
/// `f_i = u1_i + u2_i` on a bounded interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Example1Config {
    pub n: usize,
    /// Positive, nonincreasing.
    pub k: Point,
    pub u1: Vec<PiecewiseLinear>,
    pub u2: Vec<SmoothPart>,
    pub c: f64,
    pub domain: DomainBox,
}

struct Example1 {
    k: Vec<f64>,
    u1: Vec<PiecewiseLinear>,
    u2: Vec<SmoothPart>,
}

impl Evaluator for Example1 {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k.len()).map(|i| (self.u1[i].eval(x[0]) + self.u2[i].value(x[0])) * self.k[i]).collect()
    }

    /// Absent on the kink locus, where one-sided derivatives disagree.
    fn directional(&self, x0: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        if self.u1.iter().any(|u| u.is_kink(x0[0])) {
            return None;
        }
        Some(
            (0..self.k.len())
                .map(|i| (self.u1[i].right_slope(x0[0]) + self.u2[i].d1(x0[0])) * h[0] * self.k[i])
                .collect(),
        )
    }
}

pub fn make_example1(cfg: Example1Config) -> Result<VectorMapping> {
    let Example1Config { n, k, u1, u2, c, domain } = cfg;
    require_1d(&domain)?;
    check_constant(c)?;
    if n == 0 {
        return Err(Error::Empty("example1 components"));
    }
    for len in [k.dim(), u1.len(), u2.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    if k.coords().iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter("k must have positive entries".into()));
    }
    if k.coords().windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("k entries must be nonincreasing".into()));
    }
    for i in 0..n {
        audit_component(i, &u1[i], &u2[i], c, &domain)?;
    }
    let mut coords: Vec<f64> = u1.iter().flat_map(|u| u.positions()).collect();
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    let spec = orthant_spec(n, c, k.clone())?;
    VectorMapping::new("example1", domain, n, Arc::new(Example1 { k: k.into_vec(), u1, u2 }))?
        .with_kink_locus(KinkLocus { axis: 0, coords })
        .with_claimed(spec)
}

/// One instance of each family with claimed constants: an affine map
/// R^2 -> R^2, a quadratic map R^2 -> R^3, `-x^2`, a kinked semiconvex
/// scalar function and a three-component truncated construction.
pub fn testbed() -> Vec<VectorMapping> {
    let square = DomainBox::symmetric(2, 1.0).expect("box");
    let interval = DomainBox::symmetric(1, 1.0).expect("box");
    let sine = |amp: f64, freq: f64, phase: f64| SmoothTerm::Sine { amp, freq, phase };
    vec![
        make_affine(vec![vec![1.0, -2.0], vec![0.5, 0.25]], vec![0.5, -1.0], square.clone()).expect("affine"),
        make_quadratic(
            vec![vec![vec![-1.0, 0.0], vec![0.0, 0.5]], vec![vec![0.5, 0.2], vec![0.2, -0.4]], vec![vec![0.3, 0.0], vec![0.0, 0.3]]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, -0.5]],
            vec![0.0, 1.0, -1.0],
            Point::filled(3, 1.0),
            square,
        )
        .expect("quadratic"),
        make_semiconvex_scalar(PiecewiseLinear::zero(), SmoothPart::quadratic(-1.0, 0.0, 0.0), 1.0, interval.clone())
            .expect("neg square"),
        make_semiconvex_scalar(
            PiecewiseLinear::new(0.0, -1.0, vec![(0.25, 1.0)]).expect("kinks"),
            SmoothPart(vec![sine(0.3, 2.0, 0.0)]),
            0.6,
            interval.clone(),
        )
        .expect("kinked"),
        make_example1(Example1Config {
            n: 3,
            k: Point::new(vec![1.0, 0.5, 0.25]).expect("k"),
            u1: vec![
                PiecewiseLinear::abs(0.0),
                PiecewiseLinear::new(0.0, -1.0, vec![(-0.5, 0.0), (0.5, 1.0)]).expect("kinks"),
                PiecewiseLinear::new(0.0, 0.5, vec![(0.125, 1.0)]).expect("kinks"),
            ],
            u2: vec![SmoothPart(vec![sine(0.5, 1.0, 0.3)]), SmoothPart::quadratic(-0.5, 0.0, 0.0), SmoothPart::zero()],
            c: 0.5,
            domain: interval,
        })
        .expect("example1"),
    ]
}

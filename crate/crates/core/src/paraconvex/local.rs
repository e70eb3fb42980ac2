use rand::Rng;

use super::{PairSet, Prepared};
use crate::cone::feasibility::least_distance;
use crate::cone::{refs, DualFunctional, NormKind, Point, PolyCone};
use crate::error::{Error, Result};
use crate::mapping::{DomainBox, VectorMapping};
use crate::modulus::{ModulusKind, ParaSpec};
use crate::report::{CheckReport, SampleTriple, Witness};
use crate::sampling;

/// Shell points sit at `radius * (1 - SHELL)` to stay inside closed balls.
const SHELL: f64 = 1.0 / (1u64 << 20) as f64;

/// Inflation of assembled envelope witnesses for non-orthant cones.
pub const ENVELOPE_INFLATION: f64 = 1.1;

/// Midpoint convexity of `g(x) = y*(f(x)) + C1 s ||x||^2 y*(k)` where
/// `alpha(t) = s t^2` and the domain carries the l2 norm.
pub fn check_fact2(f: &VectorMapping, spec: &ParaSpec, y: &DualFunctional, pairs: &PairSet, tol: f64) -> Result<CheckReport> {
    if spec.modulus.kind != ModulusKind::Square {
        return Err(Error::Precondition("fact2 needs the square modulus".into()));
    }
    if f.domain_norm() != NormKind::Two {
        return Err(Error::Precondition(format!(
            "fact2 needs the l2 domain norm (mapping uses {})",
            f.domain_norm().as_str()
        )));
    }
    let prep = Prepared::new(f, spec)?;
    let y = DualFunctional::new(y.coeffs().clone(), &prep.cone, 1e-12)?;
    let weight = spec.c1 * spec.modulus.scale * y.apply(&spec.k);
    let g = |x: &Point| -> Result<f64> {
        let n = x.norm(NormKind::Two);
        Ok(y.apply(&f.eval(x)?) + weight * n * n)
    };
    let mut report = CheckReport::new(tol, pairs.seed);
    for (a, b) in &pairs.pairs {
        let mid = a.convex_combination(0.5, b);
        let m = 0.5 * g(a)? + 0.5 * g(b)? - g(&mid)?;
        report.observe(m, || Witness::Pair { x: a.clone(), y: b.clone() });
    }
    report.quantity("weight", vec![weight]);
    Ok(report.finish())
}

/// `g(mix) <= lambda g(x) + (1-lambda) g(y) + eps lambda (1-lambda) ||x-y||`
/// for `x, y` in the `delta` ball around `x0`. A quarter of the budget goes
/// to antipodal pairs on the shell.
pub fn check_approx_convex(
    g: &VectorMapping,
    x0: &Point,
    epsilon: f64,
    delta: f64,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    if g.codomain_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: g.codomain_dim() });
    }
    x0.check_dim(g.domain_dim())?;
    if !(epsilon >= 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("need epsilon >= 0 and delta > 0 (got {epsilon}, {delta})")));
    }
    if !g.domain().contains_ball(x0.coords(), delta) {
        return Err(Error::Precondition(format!("the {delta}-ball around {:?} leaves the domain", x0.coords())));
    }
    let norm = g.domain_norm();
    let mut rng = sampling::rng(seed);
    let shell = delta * (1.0 - SHELL);
    let n_shell = budget / 4;
    let mut report = CheckReport::new(tol, seed);
    for i in 0..budget {
        let (x, y, lambda) = if i < n_shell {
            let u = Point::from_vec_unchecked(sampling::unit_direction(&mut rng, x0.dim(), norm));
            let lambda = if i % 2 == 0 { 0.5 } else { rng.gen_range(0.0..=1.0) };
            (x0.axpy(shell, &u), x0.axpy(-shell, &u), lambda)
        } else {
            let x = Point::from_vec_unchecked(sampling::in_ball(&mut rng, x0.coords(), shell, norm));
            let y = Point::from_vec_unchecked(sampling::in_ball(&mut rng, x0.coords(), shell, norm));
            (x, y, rng.gen_range(0.0..=1.0))
        };
        let t = SampleTriple::new(x, y, lambda);
        let gx = g.eval(&t.x)?[0];
        let gy = g.eval(&t.y)?[0];
        let gm = g.eval(&t.mix())?[0];
        let d = t.x.distance(&t.y, norm);
        let m = lambda * gx + (1.0 - lambda) * gy + epsilon * lambda * (1.0 - lambda) * d - gm;
        report.observe(m, || Witness::Triple(t));
    }
    Ok(report.finish())
}

fn ball_samples(f: &VectorMapping, x0: &Point, radius: f64, budget: usize, seed: u64) -> Vec<Point> {
    let norm = f.domain_norm();
    let mut rng = sampling::rng(seed);
    let shell = radius * (1.0 - SHELL);
    let d = x0.dim();
    let mut pts = vec![x0.clone()];
    for i in 0..d {
        for s in [-1.0, 1.0] {
            pts.push(x0.axpy(s * shell, &Point::basis(d, i)));
        }
    }
    let n_shell = budget / 4;
    while pts.len() < budget {
        if pts.len() < n_shell {
            let u = Point::from_vec_unchecked(sampling::unit_direction(&mut rng, d, norm));
            pts.push(x0.axpy(shell, &u));
        } else {
            pts.push(Point::from_vec_unchecked(sampling::in_ball(&mut rng, x0.coords(), shell, norm)));
        }
    }
    pts
}

/// Samples the ball around `x0`, builds `k_bar` from per-functional
/// envelopes `M_j = max |a_j(f(x))|` and verifies `-k_bar <= f(x) <= k_bar`.
///
/// Orthants take `k_bar = M`. Other cones take the least-norm `k` with
/// `a_j(k) >= M_j`, inflated by [`ENVELOPE_INFLATION`].
pub fn check_local_vector_bounded(
    f: &VectorMapping,
    cone: &PolyCone,
    x0: &Point,
    radius: f64,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    if cone.dim() != f.codomain_dim() {
        return Err(Error::DimensionMismatch { expected: f.codomain_dim(), got: cone.dim() });
    }
    x0.check_dim(f.domain_dim())?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
    }
    if !f.domain().contains_ball(x0.coords(), radius) {
        return Err(Error::Precondition(format!("the {radius}-ball around {:?} leaves the domain", x0.coords())));
    }
    let cone = cone.with_inequalities()?;
    let duals = cone.dual_generators().expect("completed");
    let pts = ball_samples(f, x0, radius, budget, seed);
    let values = pts.iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let envelope: Vec<f64> = duals
        .iter()
        .map(|a| values.iter().map(|v| a.dot(v).abs()).fold(0.0, f64::max))
        .collect();
    let k_bar = if cone.is_orthant() {
        Point::new(envelope.clone())?
    } else {
        let k = least_distance(&refs(duals), &envelope).ok_or_else(|| Error::NotPointed(cone.name().to_string()))?;
        Point::new(k)?.scale(ENVELOPE_INFLATION)
    };
    let mut report = CheckReport::new(tol, seed);
    for (x, v) in pts.iter().zip(&values) {
        let upper = &k_bar - v;
        let lower = &k_bar + v;
        let m = duals.iter().map(|a| a.dot(&upper).min(a.dot(&lower))).fold(f64::INFINITY, f64::min);
        report.observe(m, || Witness::Point { x: x.clone() });
    }
    report.quantity("k_bar", k_bar.into_vec());
    report.quantity("envelope", envelope);
    Ok(report.finish())
}

/// Estimates the least `L` with `-L ||u-x|| k <= f(u) - f(x) <= L ||u-x|| k`
/// on sampled pairs of `region`, then checks the norm bound
/// `||f(u) - f(x)|| <= factor L ||u-x|| ||k||` where `factor` is the
/// normality constant `gamma` for orthants and `2 gamma + 1` otherwise.
///
/// Half the pairs are uniform; the rest are local pairs with gaps between
/// `1e-4` and `1e-1` of the region width.
pub fn check_vector_lipschitz(
    f: &VectorMapping,
    spec: &ParaSpec,
    region: &DomainBox,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    Prepared::new(f, spec)?;
    if !f.domain().contains_box(region) {
        return Err(Error::Precondition("region is not inside the domain".into()));
    }
    let pairs = lipschitz_pairs(f, region, budget, seed);
    lipschitz_on_pairs(f, spec, &pairs, seed, tol)
}

pub(crate) fn lipschitz_on_pairs(
    f: &VectorMapping,
    spec: &ParaSpec,
    pairs: &[(Point, Point)],
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    let prep = Prepared::new(f, spec)?;
    let dnorm = f.domain_norm();
    let cnorm = prep.norm();
    let duals = prep.duals();
    let ak: Vec<f64> = duals.iter().map(|a| a.dot(&spec.k)).collect();
    let mut diffs = Vec::with_capacity(pairs.len());
    let mut l: f64 = 0.0;
    for (u, x) in pairs {
        let d = &f.eval(u)? - &f.eval(x)?;
        let n = u.distance(x, dnorm);
        if n == 0.0 {
            continue;
        }
        for (a, &ak) in duals.iter().zip(&ak) {
            let v = a.dot(&d).abs();
            if ak > 0.0 {
                l = l.max(v / (n * ak));
            } else if v > tol * (1.0 + n) {
                l = f64::INFINITY;
            }
        }
        diffs.push((u, x, d, n));
    }
    let gamma = spec.cone.normality_constant(cnorm, 4096, sampling::derive_seed(seed, 7))?;
    let factor = if spec.cone.is_orthant() { gamma } else { 2.0 * gamma + 1.0 };
    let knorm = spec.k.norm(cnorm);
    let mut report = CheckReport::new(tol, seed);
    if !l.is_finite() {
        report.note("no finite L: some inequality functional vanishes on k but not on f(u) - f(x)");
        report.observe(f64::NEG_INFINITY, || Witness::Step { t: 0.0 });
    } else {
        for (u, x, d, n) in &diffs {
            let lk = spec.k.scale(l * n);
            let sandwich = duals
                .iter()
                .map(|a| a.dot(&(&lk - d)).min(a.dot(&(&lk + d))))
                .fold(f64::INFINITY, f64::min);
            let bound = factor * l * n * knorm;
            let norm_form = bound - d.norm(cnorm);
            let m = sandwich.min(norm_form) / (1.0 + bound);
            report.observe(m, || Witness::Pair { x: (*u).clone(), y: (*x).clone() });
        }
    }
    report.quantity("L", vec![l]);
    report.quantity("gamma", vec![gamma]);
    report.quantity("norm_factor", vec![factor]);
    Ok(report.finish())
}

pub(crate) fn lipschitz_pairs(f: &VectorMapping, region: &DomainBox, budget: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = sampling::rng(seed);
    let width = (0..region.dim()).map(|i| region.upper()[i] - region.lower()[i]).fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(budget);
    let n_uniform = budget / 2;
    while out.len() < budget {
        let x = Point::from_vec_unchecked(region.sample(&mut rng));
        let u = if out.len() < n_uniform {
            Point::from_vec_unchecked(region.sample(&mut rng))
        } else {
            let dir = Point::from_vec_unchecked(sampling::unit_direction(&mut rng, region.dim(), f.domain_norm()));
            let gap = width * 10f64.powf(-rng.gen_range(1.0..4.0));
            let u = x.axpy(gap, &dir);
            if !region.contains(u.coords()) {
                continue;
            }
            u
        };
        out.push((u, x));
    }
    out
}

//! Difference quotients along rays, the monotone-bracket estimator of
//! directional derivatives, and the differentiability test batteries.

mod frechet;
mod gateaux;

use serde::Serialize;

use crate::cone::feasibility::least_distance;
use crate::cone::{refs, Point};
use crate::error::{Error, Result};
use crate::mapping::VectorMapping;
use crate::modulus::ParaSpec;
use crate::paraconvex::Prepared;
use crate::report::{CheckReport, Witness};

pub use frechet::{frechet_test, FrechetOptions, FrechetReport, FrechetRow};
pub use gateaux::{
    gateaux_scan, gateaux_scan_points, gateaux_test, sample_directions, Confusion, GateauxOptions, GateauxReport,
    ScanPoint, ScanReport,
};

/// Multiple of machine epsilon in the rounding allowance of a quotient:
/// `rho(t) = KAPPA eps (||f(x0 + t h)|| + ||f(x0)|| + 1) / t`.
pub const ROUNDING_KAPPA: f64 = 16.0;

pub(crate) fn rounding(value_norm: f64, base_norm: f64, t: f64) -> f64 {
    ROUNDING_KAPPA * f64::EPSILON * (value_norm + base_norm + 1.0) / t
}

/// Quotients `(f(x0 + t h) - f(x0)) / t` on a decreasing geometric grid,
/// with their corrected versions `raw + C alpha(t) / t k`.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientTrace {
    pub x0: Point,
    pub h: Point,
    pub t_grid: Vec<f64>,
    pub raw: Vec<Point>,
    pub corrected: Vec<Point>,
    pub spec: ParaSpec,
    /// `h` was rescaled to unit length (it was within 1e-6 of it).
    pub normalized: bool,
    #[serde(skip)]
    value_norms: Vec<f64>,
    #[serde(skip)]
    base_norm: f64,
}

impl QuotientTrace {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// The scalar `C alpha(t_i) / t_i` added to `raw[i]`.
    pub fn correction(&self, i: usize) -> Result<f64> {
        self.spec.correction_scalar(self.t_grid[i], self.t_grid[i])
    }

    fn rho(&self, i: usize) -> f64 {
        rounding(self.value_norms[i], self.base_norm, self.t_grid[i])
    }
}

fn check_point(f: &VectorMapping, x0: &Point) -> Result<()> {
    x0.check_dim(f.domain_dim())?;
    if !f.domain().contains(x0.coords()) {
        return Err(Error::OutsideDomain { point: x0.coords().to_vec() });
    }
    Ok(())
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("ratio {ratio} must lie in (0, 1)")));
    }
    Ok(())
}

/// Builds the trace at `t_j = t0 ratio^j`, `j < depth`, for a unit `h`.
pub fn build_trace(
    f: &VectorMapping,
    spec: &ParaSpec,
    x0: &Point,
    h: &Point,
    t0: f64,
    ratio: f64,
    depth: usize,
) -> Result<QuotientTrace> {
    let prep = Prepared::new(f, spec)?;
    check_point(f, x0)?;
    h.check_dim(f.domain_dim())?;
    check_ratio(ratio)?;
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".into()));
    }
    let n = h.norm(f.domain_norm());
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::NotUnit(n));
    }
    let normalized = n != 1.0;
    let h = if normalized { h.scale(1.0 / n) } else { h.clone() };
    let end = x0.axpy(t0, &h);
    if !(t0 > 0.0) || !f.domain().contains(end.coords()) {
        return Err(Error::OutsideDomain { point: end.into_vec() });
    }
    let fx0 = f.eval(x0)?;
    let norm = prep.norm();
    let mut trace = QuotientTrace {
        x0: x0.clone(),
        h,
        t_grid: Vec::with_capacity(depth),
        raw: Vec::with_capacity(depth),
        corrected: Vec::with_capacity(depth),
        spec: spec.clone(),
        normalized,
        value_norms: Vec::with_capacity(depth),
        base_norm: fx0.norm(norm),
    };
    let mut t = t0;
    for _ in 0..depth {
        let ft = f.eval(&x0.axpy(t, &trace.h))?;
        let raw = (&ft - &fx0).scale(1.0 / t);
        let corr = spec.correction_scalar(t, t)?;
        trace.corrected.push(raw.axpy(corr, &spec.k));
        trace.raw.push(raw);
        trace.value_norms.push(ft.norm(norm));
        trace.t_grid.push(t);
        t *= ratio;
    }
    Ok(trace)
}

/// Checks `corrected(t) - corrected(t1) + C alpha(t1) / t1 k` in `K` for every
/// grid pair `t1 < t`, which is `phi(t) - phi(t1) + C alpha(t) / t k` in `K`.
/// Margins include the rounding allowance `rho(t) + rho(t1)`.
pub fn check_alpha_monotone(trace: &QuotientTrace, tol: f64) -> Result<CheckReport> {
    let cone = trace.spec.cone.with_inequalities()?;
    let duals = cone.dual_generators().expect("completed");
    let mut report = CheckReport::new(tol, 0);
    for i in 0..trace.len() {
        for j in i + 1..trace.len() {
            let v = (&trace.corrected[i] - &trace.corrected[j]).axpy(trace.correction(j)?, &trace.spec.k);
            let m = duals.iter().map(|a| a.dot(&v)).fold(f64::INFINITY, f64::min) + trace.rho(i) + trace.rho(j);
            report.observe(m, || Witness::Steps { t1: trace.t_grid[j], t: trace.t_grid[i] });
        }
    }
    Ok(report.finish())
}

/// Builds `a` with `a_j(a) <= inf_i a_j(corrected[i])` for every normalized
/// inequality functional and checks `corrected[i] - a` in `K`. Orthants take
/// the componentwise infimum; other cones a least-norm solution with a 10%
/// margin on each functional.
pub fn check_lower_bound(trace: &QuotientTrace, tol: f64) -> Result<CheckReport> {
    if trace.corrected.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("trace values"));
    }
    let cone = trace.spec.cone.with_inequalities()?;
    let duals = cone.dual_generators().expect("completed");
    let inf: Vec<f64> = duals
        .iter()
        .map(|a| trace.corrected.iter().map(|c| a.dot(c)).fold(f64::INFINITY, f64::min))
        .collect();
    let a = if cone.is_orthant() {
        Point::new(inf.clone())?
    } else {
        let target: Vec<f64> = inf.iter().map(|m| -m + 0.1 * m.abs()).collect();
        let b = least_distance(&refs(duals), &target).ok_or_else(|| Error::NotPointed(cone.name().to_string()))?;
        Point::new(b)?.scale(-1.0)
    };
    let mut report = CheckReport::new(tol, 0);
    for (i, c) in trace.corrected.iter().enumerate() {
        let v = c - &a;
        let m = duals.iter().map(|d| d.dot(&v)).fold(f64::INFINITY, f64::min) + trace.rho(i);
        report.observe(m, || Witness::Step { t: trace.t_grid[i] });
    }
    report.quantity("a", a.into_vec());
    report.quantity("inf", inf);
    Ok(report.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorOptions {
    pub tol: f64,
    /// Defaults to `min(0.1, exit_time / 2)`.
    pub t0: Option<f64>,
    pub ratio: f64,
    pub max_depth: usize,
    /// Do not stop while the current step is at or above this value.
    pub stop_below: Option<f64>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions { tol: 1e-6, t0: None, ratio: 0.5, max_depth: 40, stop_below: None }
    }
}

impl EstimatorOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub value: Point,
    /// First step of the schedule.
    pub t0: f64,
    pub error_bound: f64,
    pub t_used: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Some step fell below `1e-8 ||x0||`, where cancellation dominates.
    pub cancellation_warning: bool,
}

/// Walks `t_m = t0 ratio^m` and stops at the first `m` with
/// `max_j |a_j(raw[m] - raw[m+1])| + C alpha(t_m) / t_m a_j(k) < tol`.
/// The value is `raw[m+1]`; the error bound is that stopping quantity plus
/// the rounding allowance of `raw[m+1]`.
pub fn directional_derivative(
    f: &VectorMapping,
    spec: &ParaSpec,
    x0: &Point,
    h: &Point,
    opts: EstimatorOptions,
) -> Result<DerivativeEstimate> {
    let prep = Prepared::new(f, spec)?;
    check_point(f, x0)?;
    h.check_dim(f.domain_dim())?;
    check_ratio(opts.ratio)?;
    let s = h.norm(f.domain_norm());
    if s == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let t0 = opts.t0.unwrap_or_else(|| 0.1f64.min(0.5 * f.domain().exit_time(x0.coords(), h.coords())));
    let end = x0.axpy(t0, h);
    if !(t0 > 0.0) || !f.domain().contains(end.coords()) {
        return Err(Error::OutsideDomain { point: end.into_vec() });
    }
    let duals = prep.duals();
    let ak: Vec<f64> = duals.iter().map(|a| a.dot(&spec.k)).collect();
    let fx0 = f.eval(x0)?;
    let norm = prep.norm();
    let base = fx0.norm(norm);
    let x0n = x0.norm(f.domain_norm());
    // The quotient and its rounding allowance.
    let quotient = |t: f64| -> Result<(Point, f64)> {
        let ft = f.eval(&x0.axpy(t, h))?;
        let rho = rounding(ft.norm(norm), base, t);
        Ok(((&ft - &fx0).scale(1.0 / t), rho))
    };

    let mut t = t0;
    let (mut prev, mut prev_rho) = quotient(t)?;
    let mut warn = t * s < 1e-8 * x0n;
    let mut last_q = f64::INFINITY;
    for m in 1..opts.max_depth.max(1) {
        let next_t = t * opts.ratio;
        let (next, rho) = quotient(next_t)?;
        warn |= next_t * s < 1e-8 * x0n;
        let corr = spec.correction_scalar(t * s, t)?;
        let diff = &prev - &next;
        let q = duals
            .iter()
            .zip(&ak)
            .map(|(a, &ak)| a.dot(&diff).abs() + corr * ak)
            .fold(0.0, f64::max);
        last_q = q;
        let allowed = opts.stop_below.is_none_or(|b| next_t < b);
        if q < opts.tol && allowed {
            return Ok(DerivativeEstimate {
                value: next,
                t0,
                error_bound: q + rho,
                t_used: next_t,
                iterations: m + 1,
                converged: true,
                cancellation_warning: warn,
            });
        }
        prev = next;
        prev_rho = rho;
        t = next_t;
    }
    Ok(DerivativeEstimate {
        value: prev,
        t0,
        error_bound: last_q + prev_rho,
        t_used: t,
        iterations: opts.max_depth.max(1),
        converged: false,
        cancellation_warning: warn,
    })
}

pub(crate) fn converged_estimate(
    f: &VectorMapping,
    spec: &ParaSpec,
    x0: &Point,
    h: &Point,
    opts: EstimatorOptions,
) -> Result<DerivativeEstimate> {
    let est = directional_derivative(f, spec, x0, h, opts)?;
    if !est.converged {
        return Err(Error::NotConverged { x0: x0.coords().to_vec(), h: h.coords().to_vec(), error_bound: est.error_bound });
    }
    Ok(est)
}

/// Checks `f'(x0; h) <= raw(t) + C alpha(t ||h||) / t k` for each sampled `t`.
/// Margins include the estimate's error bound and the rounding allowance.
pub fn check_upper_bound(
    f: &VectorMapping,
    spec: &ParaSpec,
    x0: &Point,
    h: &Point,
    estimate: &DerivativeEstimate,
    ts: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    if !estimate.converged {
        return Err(Error::Precondition("check_upper_bound needs a converged estimate".into()));
    }
    let prep = Prepared::new(f, spec)?;
    check_point(f, x0)?;
    let s = h.norm(f.domain_norm());
    let norm = prep.norm();
    let fx0 = f.eval(x0)?;
    let base = fx0.norm(norm);
    let mut report = CheckReport::new(tol, 0);
    for &t in ts {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("step {t} must be positive")));
        }
        let ft = f.eval(&x0.axpy(t, h))?;
        let raw = (&ft - &fx0).scale(1.0 / t);
        let v = &raw.axpy(spec.correction_scalar(t * s, t)?, &spec.k) - &estimate.value;
        let allowance = estimate.error_bound + rounding(ft.norm(norm), base, t);
        report.observe(prep.margin(&v) + allowance, || Witness::Step { t });
    }
    Ok(report.finish())
}

/// Subadditivity `f'(h1 + h2) <= f'(h1) + f'(h2)` on each pair and
/// homogeneity `||f'(l h) - l f'(h)|| <= tol max(1, l)` for each `h` of the
/// pairs and each `l`. Estimation error bounds are added to the allowance.
pub fn check_sublinear(
    f: &VectorMapping,
    spec: &ParaSpec,
    x0: &Point,
    pairs: &[(Point, Point)],
    lambdas: &[f64],
    opts: EstimatorOptions,
    tol: f64,
) -> Result<CheckReport> {
    let prep = Prepared::new(f, spec)?;
    check_point(f, x0)?;
    let norm = prep.norm();
    let est = |h: &Point| -> Result<(Point, f64)> {
        if h.coords().iter().all(|&v| v == 0.0) {
            return Ok((Point::zeros(f.codomain_dim()), 0.0));
        }
        let e = converged_estimate(f, spec, x0, h, opts)?;
        Ok((e.value, e.error_bound))
    };
    let mut report = CheckReport::new(tol, 0);
    for (h1, h2) in pairs {
        let (d1, e1) = est(h1)?;
        let (d2, e2) = est(h2)?;
        let (d12, e12) = est(&(h1 + h2))?;
        let v = &(&d1 + &d2) - &d12;
        report.observe(prep.margin(&v) + e1 + e2 + e12, || Witness::Directions { h1: h1.clone(), h2: h2.clone() });
        for &l in lambdas {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter(format!("homogeneity factor {l} must be positive")));
            }
            for (h, d, e) in [(h1, &d1, e1), (h2, &d2, e2)] {
                if h.coords().iter().all(|&v| v == 0.0) {
                    continue;
                }
                let (dl, el) = est(&h.scale(l))?;
                let defect = (&dl - &d.scale(l)).norm(norm);
                let m = (l.max(1.0) - 1.0) * tol + el + l * e - defect;
                report.observe(m, || Witness::Direction { h: h.clone(), t: l });
            }
        }
    }
    Ok(report.finish())
}

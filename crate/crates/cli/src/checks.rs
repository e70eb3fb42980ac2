//! Runs one configured check against the experiment's mapping and spec.

use paracone::cone::DualFunctional;
use paracone::derivative::{
    build_trace, check_alpha_monotone, check_lower_bound, check_sublinear, check_upper_bound, directional_derivative,
    frechet_test, gateaux_scan, gateaux_scan_points, gateaux_test, sample_directions, EstimatorOptions, FrechetOptions,
    GateauxOptions,
};
use paracone::modulus::{geometric_grid, verify_modulus};
use paracone::paraconvex::{
    check_approx_convex, check_fact2, check_inequality, check_local_vector_bounded, check_vector_lipschitz, falsify,
    scalarize_check, FalsifyOptions, Form, PairSet, TripleSet, DEFAULT_TOL,
};
use paracone::{DomainBox, Point, VectorMapping};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Check, CheckConfig, ConfigError, Experiment, BUDGETED_KINDS, SEEDED_KINDS};
use crate::output::{quotient_csv, scan_csv};

/// Command-line values that take precedence over the configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub form: Option<Form>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut CheckConfig) {
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.budget.is_some() {
            cfg.budget = self.budget;
        }
        if self.tol.is_some() {
            cfg.tol = self.tol;
        }
        if self.form.is_some() {
            cfg.form = self.form;
        }
    }
}

/// Result of one check, ready for the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub name: String,
    pub kind: String,
    pub pass: bool,
    pub report: Value,
    /// Plot-ready rows for trace-type checks.
    #[serde(skip)]
    pub csv: Option<String>,
}

/// Default tolerance for derivative-level checks.
pub const DERIVATIVE_TOL: f64 = 1e-6;

struct Ctx<'a> {
    exp: &'a Experiment,
    cfg: &'a CheckConfig,
    line: Option<usize>,
}

impl Ctx<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError { line: self.line, message: format!("check `{}`: {}", self.cfg.kind, message.into()) }
    }

    fn lib(&self, e: paracone::Error) -> ConfigError {
        self.err(e.to_string())
    }

    fn need<T: Clone>(&self, v: &Option<T>, field: &str) -> Result<T, ConfigError> {
        v.clone().ok_or_else(|| self.err(format!("missing `{field}`")))
    }

    fn point(&self, v: &Option<Vec<f64>>, field: &str) -> Result<Point, ConfigError> {
        Point::new(self.need(v, field)?).map_err(|e| self.lib(e))
    }

    fn tol(&self, default: f64) -> f64 {
        self.cfg.tol.unwrap_or(default)
    }

    fn seed(&self) -> u64 {
        self.cfg.seed.expect("validated")
    }

    fn budget(&self) -> usize {
        self.cfg.budget.expect("validated")
    }

    fn region(&self) -> Result<DomainBox, ConfigError> {
        match &self.cfg.region {
            Some(r) => DomainBox::new(r.lower.clone(), r.upper.clone()).map_err(|e| self.lib(e)),
            None => Ok(self.exp.mapping.domain().clone()),
        }
    }

    fn functional(&self) -> Result<DualFunctional, ConfigError> {
        let cone = &self.exp.spec.cone;
        match &self.cfg.functional {
            Some(c) => DualFunctional::new(Point::new(c.clone()).map_err(|e| self.lib(e))?, cone, 1e-12).map_err(|e| self.lib(e)),
            None => Ok(DualFunctional::dual_generators_of(cone).map_err(|e| self.lib(e))?.remove(0)),
        }
    }

    fn estimator(&self, tol: f64) -> EstimatorOptions {
        let mut o = EstimatorOptions::default().with_tol(tol);
        o.t0 = self.cfg.t0;
        if let Some(r) = self.cfg.ratio {
            o.ratio = r;
        }
        if let Some(d) = self.cfg.depth {
            o.max_depth = d;
        }
        o
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Validates the explicit-seed and explicit-budget rules, then runs.
pub fn run_check(exp: &Experiment, check: &Check, overrides: &Overrides) -> Result<Outcome, ConfigError> {
    let mut cfg = check.config.clone();
    overrides.apply(&mut cfg);
    let ctx = Ctx { exp, cfg: &cfg, line: check.line };
    let kind = cfg.kind.as_str();
    if SEEDED_KINDS.contains(&kind) && cfg.seed.is_none() {
        return Err(ctx.err("missing `seed` (stochastic checks need an explicit seed)"));
    }
    if BUDGETED_KINDS.contains(&kind) && cfg.budget.is_none() && !(kind == "gateaux-scan" && cfg.points.is_some()) {
        return Err(ctx.err("missing `budget`"));
    }
    let f = &exp.mapping;
    let spec = &exp.spec;
    let form = cfg.form.unwrap_or_default();
    let mut csv = None;
    let (pass, report) = match kind {
        "check-paraconvex" => {
            let triples = TripleSet::uniform(f.domain(), ctx.budget(), ctx.seed());
            let r = check_inequality(f, spec, form, &triples, ctx.tol(DEFAULT_TOL)).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "falsify" => {
            let opts = FalsifyOptions::new(ctx.budget(), ctx.seed())
                .with_refine(cfg.refine.unwrap_or(false))
                .with_tol(ctx.tol(DEFAULT_TOL));
            let r = falsify(f, spec, form, opts).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "scalarize" => {
            let fs = match &cfg.functionals {
                Some(rows) => rows
                    .iter()
                    .map(|c| DualFunctional::new(Point::new(c.clone())?, &spec.cone, 1e-12))
                    .collect::<paracone::Result<Vec<_>>>()
                    .map_err(|e| ctx.lib(e))?,
                None => DualFunctional::dual_generators_of(&spec.cone).map_err(|e| ctx.lib(e))?,
            };
            let triples = TripleSet::uniform(f.domain(), ctx.budget(), ctx.seed());
            let r = scalarize_check(f, spec, form, &fs, &triples, ctx.tol(DEFAULT_TOL)).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "fact2" => {
            let y = ctx.functional()?;
            let pairs = PairSet::uniform(f.domain(), ctx.budget(), ctx.seed());
            let r = check_fact2(f, spec, &y, &pairs, ctx.tol(DEFAULT_TOL)).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "approx-convex" => {
            let y = ctx.functional()?;
            let g = scalarized(f, y);
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let (eps, delta) = (ctx.need(&cfg.epsilon, "epsilon")?, ctx.need(&cfg.delta, "delta")?);
            let r = check_approx_convex(&g, &x0, eps, delta, ctx.budget(), ctx.seed(), ctx.tol(DEFAULT_TOL))
                .map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "bounded" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let radius = ctx.need(&cfg.radius, "radius")?;
            let r = check_local_vector_bounded(f, &spec.cone, &x0, radius, ctx.budget(), ctx.seed(), ctx.tol(DEFAULT_TOL))
                .map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "lipschitz" => {
            let region = ctx.region()?;
            let r = check_vector_lipschitz(f, spec, &region, ctx.budget(), ctx.seed(), ctx.tol(DEFAULT_TOL))
                .map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "trace" | "lower-bound" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let h = ctx.point(&cfg.h, "h")?;
            let t0 = cfg.t0.unwrap_or_else(|| 0.1f64.min(0.5 * f.domain().exit_time(x0.coords(), h.coords())));
            let tr = build_trace(f, spec, &x0, &h, t0, cfg.ratio.unwrap_or(0.5), cfg.depth.unwrap_or(40))
                .map_err(|e| ctx.lib(e))?;
            let tol = ctx.tol(DEFAULT_TOL);
            let r = if kind == "trace" { check_alpha_monotone(&tr, tol) } else { check_lower_bound(&tr, tol) }
                .map_err(|e| ctx.lib(e))?;
            csv = Some(quotient_csv(&tr.t_grid, &tr.raw, &tr.corrected));
            (r.pass, to_value(&r))
        }
        "derivative" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let h = ctx.point(&cfg.h, "h")?;
            let mut opts = ctx.estimator(ctx.tol(DERIVATIVE_TOL));
            if let Some(b) = cfg.budget {
                opts.max_depth = b;
            }
            let est = directional_derivative(f, spec, &x0, &h, opts).map_err(|e| ctx.lib(e))?;
            csv = Some(estimator_csv(f, spec, &x0, &h, est.t0, opts.ratio, est.iterations).map_err(|e| ctx.lib(e))?);
            (est.converged, to_value(&est))
        }
        "upper-bound" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let h = ctx.point(&cfg.h, "h")?;
            let est = directional_derivative(f, spec, &x0, &h, ctx.estimator(DERIVATIVE_TOL)).map_err(|e| ctx.lib(e))?;
            let steps = match &cfg.steps {
                Some(s) => s.clone(),
                None => (0..5).map(|j| est.t0 * 10f64.powi(-j)).collect(),
            };
            let r = check_upper_bound(f, spec, &x0, &h, &est, &steps, ctx.tol(DEFAULT_TOL)).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "sublinear" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let dirs = directions(&ctx, f)?;
            let pairs: Vec<(Point, Point)> = (0..dirs.len()).map(|i| (dirs[i].clone(), dirs[(i + 1) % dirs.len()].clone())).collect();
            let lambdas = cfg.lambdas.clone().unwrap_or_else(|| vec![0.5, 2.0]);
            let tol = ctx.tol(DERIVATIVE_TOL);
            let r = check_sublinear(f, spec, &x0, &pairs, &lambdas, ctx.estimator(tol / 4.0), tol).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "gateaux" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let dirs = directions(&ctx, f)?;
            let r = gateaux_test(f, spec, &x0, &dirs, gateaux_options(&ctx)).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "gateaux-scan" => {
            let opts = gateaux_options(&ctx);
            let n_dirs = cfg.n_directions.unwrap_or(2 * f.domain_dim());
            let r = match &cfg.points {
                Some(rows) => {
                    let pts = rows.iter().map(|r| Point::new(r.clone())).collect::<paracone::Result<Vec<_>>>().map_err(|e| ctx.lib(e))?;
                    gateaux_scan_points(f, spec, &pts, n_dirs, opts)
                }
                None => gateaux_scan(f, spec, &ctx.region()?, ctx.budget(), n_dirs, opts),
            }
            .map_err(|e| ctx.lib(e))?;
            let pass = match r.confusion {
                Some(c) => c.false_positive == 0 && c.false_negative == 0,
                None => r.failure_density == 0.0,
            };
            csv = Some(scan_csv(&r));
            (pass, to_value(&r))
        }
        "frechet" => {
            let x0 = ctx.point(&cfg.x0, "x0")?;
            let mut o = FrechetOptions::new(ctx.seed());
            if let Some(e) = &cfg.epsilons {
                o.epsilons = e.clone();
            }
            if let Some(b) = cfg.budget {
                o.sphere_samples = b;
            }
            o.tol = ctx.tol(o.tol);
            o.schedule = cfg.steps.clone();
            if let Some(n) = cfg.n_directions {
                o.gateaux_directions = n;
            }
            let r = frechet_test(f, spec, &x0, &o).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        "modulus" => {
            let grid = geometric_grid(cfg.t0.unwrap_or(1.0), cfg.ratio.unwrap_or(0.5), cfg.depth.unwrap_or(40));
            let r = verify_modulus(&spec.modulus, &grid, cfg.threshold.unwrap_or(1e-6)).map_err(|e| ctx.lib(e))?;
            (r.pass, to_value(&r))
        }
        other => return Err(ctx.err(format!("unknown check kind `{other}`"))),
    };
    Ok(Outcome { name: check.name.clone(), kind: cfg.kind.clone(), pass, report, csv })
}

fn gateaux_options(ctx: &Ctx<'_>) -> GateauxOptions {
    let mut o = GateauxOptions::new(ctx.tol(DERIVATIVE_TOL), ctx.seed());
    o.estimator = ctx.estimator(o.tol);
    if let Some(b) = ctx.cfg.budget {
        if ctx.cfg.kind == "gateaux" {
            o.lipschitz_budget = b;
        }
    }
    o
}

fn directions(ctx: &Ctx<'_>, f: &VectorMapping) -> Result<Vec<Point>, ConfigError> {
    match &ctx.cfg.directions {
        Some(rows) => rows.iter().map(|r| Point::new(r.clone())).collect::<paracone::Result<_>>().map_err(|e| ctx.lib(e)),
        None => {
            let seed = ctx.cfg.seed.unwrap_or(0);
            Ok(sample_directions(f.domain_dim(), ctx.cfg.n_directions.unwrap_or(2 * f.domain_dim()), f.domain_norm(), seed))
        }
    }
}

/// `y* o f` as a scalar mapping on the same domain.
fn scalarized(f: &VectorMapping, y: DualFunctional) -> VectorMapping {
    let inner = f.clone();
    let label = format!("y*o{}", f.label());
    VectorMapping::from_fn(label, f.domain().clone(), 1, move |x| {
        let v = inner.eval(&Point::new(x.to_vec()).expect("finite")).expect("inside domain");
        vec![y.apply(&v)]
    })
    .expect("valid domain")
    .with_domain_norm(f.domain_norm())
}

/// The estimator's grid as quotient rows.
fn estimator_csv(
    f: &VectorMapping,
    spec: &paracone::ParaSpec,
    x0: &Point,
    h: &Point,
    t0: f64,
    ratio: f64,
    rows: usize,
) -> paracone::Result<String> {
    let fx0 = f.eval(x0)?;
    let s = h.norm(f.domain_norm());
    let mut ts = Vec::with_capacity(rows);
    let mut raw = Vec::with_capacity(rows);
    let mut corrected = Vec::with_capacity(rows);
    let mut t = t0;
    for _ in 0..rows {
        let q = (&f.eval(&x0.axpy(t, h))? - &fx0).scale(1.0 / t);
        corrected.push(q.axpy(spec.correction_scalar(t * s, t)?, &spec.k));
        raw.push(q);
        ts.push(t);
        t *= ratio;
    }
    Ok(quotient_csv(&ts, &raw, &corrected))
}

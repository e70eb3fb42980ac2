use serde::Serialize;

use super::gateaux::{gateaux_test, sample_directions, GateauxOptions, GateauxReport};
use super::{check_point, converged_estimate, rounding, EstimatorOptions};
use crate::cone::{base_of, strictly_positive_functional, Point};
use crate::error::{Error, Result};
use crate::mapping::VectorMapping;
use crate::modulus::ParaSpec;
use crate::paraconvex::Prepared;
use crate::sampling;

/// Default number of halvings in the step schedule.
pub const SCHEDULE_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrechetOptions {
    pub epsilons: Vec<f64>,
    pub sphere_samples: usize,
    /// Decreasing steps; defaults to `t_max 2^-j`, `j < 16`, with
    /// `t_max = min(0.1, d / 2)` and `d` the distance to the boundary.
    pub schedule: Option<Vec<f64>>,
    /// Membership and base-norm tolerance.
    pub tol: f64,
    pub gateaux_tol: f64,
    pub gateaux_directions: usize,
    pub seed: u64,
}

impl FrechetOptions {
    pub fn new(seed: u64) -> Self {
        FrechetOptions {
            epsilons: vec![1e-1, 1e-2, 1e-3],
            sphere_samples: 64,
            schedule: None,
            tol: 1e-9,
            gateaux_tol: 1e-6,
            gateaux_directions: 8,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrechetRow {
    pub epsilon: f64,
    /// Largest schedule step below which every sampled condition holds.
    pub delta: Option<f64>,
    /// `max lambda_t` over `t <= delta`.
    pub max_lambda: Option<f64>,
    /// Implied `max ||r_t|| <= max_lambda radius(B)`.
    pub residual_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrechetReport {
    pub x0: Point,
    pub pass: bool,
    /// Largest violation at the smallest usable step over the three
    /// conditions (membership in K, `lambda <= eps`, `||b|| <= radius`).
    pub defect: f64,
    pub functional: Point,
    pub base_radius: f64,
    pub table: Vec<FrechetRow>,
    /// Over every sampled `(t, h)` with `lambda_t > tol`.
    pub max_b_norm: f64,
    /// Smallest membership margin of a residual, allowance included.
    pub min_membership_margin: f64,
    /// Some residual left K; the claimed constants cannot hold.
    pub residual_outside_cone: bool,
    pub schedule: Vec<f64>,
    pub sphere_samples: usize,
    pub gateaux: GateauxReport,
    pub tol: f64,
    pub seed: u64,
}

struct Sample {
    t: f64,
    margin: f64,
    lambda: f64,
    b_norm: Option<f64>,
}

/// Uniform Frechet test through the base of `K`: with
/// `r_t(h) = (f(x0 + t h) - f(x0)) / t + C alpha(t) / t k - D(h)` in `K`,
/// write `r_t = lambda_t b_t` with `b_t` in the base and find, for each
/// `eps`, the largest step `delta` with `lambda_t <= eps` for all smaller
/// sampled steps and all sampled unit `h`.
pub fn frechet_test(f: &VectorMapping, spec: &ParaSpec, x0: &Point, opts: &FrechetOptions) -> Result<FrechetReport> {
    let prep = Prepared::new(f, spec)?;
    check_point(f, x0)?;
    if opts.epsilons.is_empty() {
        return Err(Error::Empty("epsilons"));
    }
    if opts.sphere_samples == 0 {
        return Err(Error::Empty("sphere samples"));
    }
    if !spec.cone.is_pointed() {
        return Err(Error::NotPointed(spec.cone.name().to_string()));
    }
    let e = strictly_positive_functional(&prep.cone)?;
    let base = base_of(&prep.cone, &e, prep.norm())?;

    let dnorm = f.domain_norm();
    let dirs = sample_directions(f.domain_dim(), opts.gateaux_directions.max(1), dnorm, sampling::derive_seed(opts.seed, 0));
    let gateaux = gateaux_test(f, spec, x0, &dirs, GateauxOptions::new(opts.gateaux_tol, sampling::derive_seed(opts.seed, 1)))?;
    if !gateaux.pass {
        return Err(Error::Precondition(format!("Gateaux test fails at x0 (defect {})", gateaux.defect)));
    }

    let dist = f.domain().boundary_distance(x0.coords());
    let schedule = match &opts.schedule {
        Some(s) => {
            if s.is_empty() || s.iter().any(|&t| !(t > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::InvalidParameter("schedule must be positive and strictly decreasing".into()));
            }
            s.clone()
        }
        None => {
            let t_max = 0.1f64.min(0.5 * dist);
            (0..SCHEDULE_DEPTH).map(|j| t_max * 0.5f64.powi(j as i32)).collect()
        }
    };
    let t_min = *schedule.last().expect("nonempty");
    let min_eps = opts.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let est_opts = EstimatorOptions {
        tol: (1e-3 * min_eps).min(opts.gateaux_tol),
        stop_below: Some(t_min),
        max_depth: 60,
        ..EstimatorOptions::default()
    };

    let norm = prep.norm();
    let fx0 = f.eval(x0)?;
    let base_norm = fx0.norm(norm);
    let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 2));
    // samples[h] holds the usable steps in decreasing order.
    let mut samples: Vec<Vec<Sample>> = Vec::with_capacity(opts.sphere_samples);
    for _ in 0..opts.sphere_samples {
        let h = Point::from_vec_unchecked(sampling::unit_direction(&mut rng, f.domain_dim(), dnorm));
        let est = converged_estimate(f, spec, x0, &h, est_opts)?;
        let deep = f.eval(&x0.axpy(est.t_used, &h))?;
        let rho_deep = rounding(deep.norm(norm), base_norm, est.t_used);
        let exit = f.domain().exit_time(x0.coords(), h.coords());
        let mut row = Vec::with_capacity(schedule.len());
        for &t in schedule.iter().filter(|&&t| t > est.t_used && t < exit) {
            let ft = f.eval(&x0.axpy(t, &h))?;
            let raw = (&ft - &fx0).scale(1.0 / t);
            let r = &raw.axpy(spec.correction_scalar(t, t)?, &spec.k) - &est.value;
            let margin = prep.margin(&r) + rounding(ft.norm(norm), base_norm, t) + rho_deep;
            let lambda = e.apply(&r);
            let b_norm = (lambda > opts.tol).then(|| r.norm(norm) / lambda);
            row.push(Sample { t, margin, lambda, b_norm });
        }
        samples.push(row);
    }

    let ok = |s: &Sample, eps: f64| {
        s.margin >= -opts.tol && s.lambda <= eps + opts.tol && s.b_norm.is_none_or(|b| b <= base.radius + opts.tol)
    };
    let violation = |s: &Sample, eps: f64| {
        (-s.margin).max(s.lambda - eps).max(s.b_norm.map_or(f64::NEG_INFINITY, |b| b - base.radius))
    };

    let mut table = Vec::with_capacity(opts.epsilons.len());
    let mut defect: f64 = 0.0;
    for &eps in &opts.epsilons {
        // delta is the largest schedule step t such that every sample at a
        // step <= t satisfies the conditions.
        let mut delta = None;
        for &t in schedule.iter().rev() {
            let all = samples.iter().flatten().filter(|s| s.t == t).all(|s| ok(s, eps));
            if !all {
                break;
            }
            delta = Some(t);
        }
        let max_lambda =
            delta.map(|d| samples.iter().flatten().filter(|s| s.t <= d).map(|s| s.lambda).fold(0.0, f64::max));
        for row in &samples {
            if let Some(s) = row.last() {
                defect = defect.max(violation(s, eps));
            }
        }
        table.push(FrechetRow { epsilon: eps, delta, max_lambda, residual_bound: max_lambda.map(|l| l * base.radius) });
    }
    let all = samples.iter().flatten();
    let max_b_norm = all.clone().filter_map(|s| s.b_norm).fold(0.0, f64::max);
    let min_membership_margin = all.map(|s| s.margin).fold(f64::INFINITY, f64::min);
    Ok(FrechetReport {
        x0: x0.clone(),
        pass: table.iter().all(|r| r.delta.is_some()),
        defect,
        functional: e.coeffs().clone(),
        base_radius: base.radius,
        table,
        max_b_norm,
        min_membership_margin,
        residual_outside_cone: min_membership_margin < -opts.tol,
        schedule,
        sphere_samples: opts.sphere_samples,
        gateaux,
        tol: opts.tol,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cone::{NormKind, PolyCone};
    use crate::mapping::{make_affine, make_semiconvex_scalar, DomainBox, PiecewiseLinear, SmoothPart};
    use crate::modulus::Modulus;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn affine_with_positive_constant() {
        // r_t = C t k exactly, so lambda_t = C t e*(k) and delta is the largest
        // schedule step at most eps / (C e*(k)).
        let f = make_affine(vec![vec![1.0, 0.0], vec![0.0, 2.0]], vec![0.0, 0.0], DomainBox::symmetric(2, 1.0).unwrap())
            .unwrap();
        let cone = Arc::new(PolyCone::orthant(2, NormKind::Sup).unwrap());
        let k = p(&[1.0, 0.5]);
        let spec = ParaSpec::min_form(Modulus::square(1.0), 1.0, k.clone(), cone).unwrap();
        let mut o = FrechetOptions::new(3);
        o.sphere_samples = 16;
        let r = frechet_test(&f, &spec, &p(&[0.0, 0.0]), &o).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.functional.distance(&p(&[1.0, 1.0]), NormKind::Sup) < 1e-12);
        for row in &r.table {
            let exact = row.epsilon / 1.5;
            let d = row.delta.unwrap();
            assert!(d <= exact * (1.0 + 1e-9) && 2.0 * d > exact, "{row:?}");
        }
        // b_t = k / e*(k) for every sample.
        assert!((r.max_b_norm - 1.0 / 1.5).abs() < 1e-6);
        assert!(!r.residual_outside_cone);
    }

    #[test]
    fn kink_fails_precondition() {
        let f = make_semiconvex_scalar(PiecewiseLinear::abs(0.0), SmoothPart::zero(), 0.0, DomainBox::symmetric(1, 1.0).unwrap())
            .unwrap();
        assert!(matches!(frechet_test(&f, f.claimed().unwrap(), &p(&[0.0]), &FrechetOptions::new(1)), Err(Error::Precondition(_))));
    }

    #[test]
    fn smooth_scalar_passes() {
        let f = make_semiconvex_scalar(
            PiecewiseLinear::zero(),
            SmoothPart::quadratic(-0.5, 0.2, 0.0),
            0.5,
            DomainBox::symmetric(1, 1.0).unwrap(),
        )
        .unwrap();
        let r = frechet_test(&f, f.claimed().unwrap(), &p(&[0.2]), &FrechetOptions::new(2)).unwrap();
        assert!(r.pass && r.defect <= 1e-9, "{r:?}");
        assert!(r.max_b_norm <= 1.0 + 1e-9);
    }
}

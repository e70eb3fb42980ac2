use serde::Serialize;

use super::{converged_estimate, EstimatorOptions};
use crate::cone::{NormKind, Point};
use crate::error::{Error, Result};
use crate::mapping::{DomainBox, VectorMapping};
use crate::modulus::ParaSpec;
use crate::paraconvex::{lipschitz_on_pairs, lipschitz_pairs, Prepared};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateauxOptions {
    pub tol: f64,
    pub seed: u64,
    /// Pairs for the local Lipschitz estimate, besides the star pairs.
    pub lipschitz_budget: usize,
    /// Step schedule; its tolerance is replaced by `tol / 4`.
    pub estimator: EstimatorOptions,
}

impl GateauxOptions {
    pub fn new(tol: f64, seed: u64) -> Self {
        GateauxOptions { tol, seed, lipschitz_budget: 400, estimator: EstimatorOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateauxReport {
    pub x0: Point,
    pub pass: bool,
    /// Largest violation over the sub-tests; `pass` iff `defect <= tol`.
    pub defect: f64,
    /// `max ||f'(h) + f'(-h)||`
    pub antisymmetry: f64,
    /// `max ||f'(h1 + h2) - f'(h1) - f'(h2)||`
    pub additivity: f64,
    /// `max ||f'(l h) - l f'(h)|| / max(1, l)` over `l` in {2, 1/2}
    pub homogeneity: f64,
    /// `max ||f'(h) - f'(h')||` minus its Lipschitz bound
    pub continuity: f64,
    pub directions: Vec<Point>,
    pub derivatives: Vec<Point>,
    pub lipschitz: f64,
    pub gamma: f64,
    pub norm_factor: f64,
    pub tol: f64,
    pub seed: u64,
    pub notes: Vec<String>,
}

/// The basis vectors first, then seeded unit directions.
pub fn sample_directions(dim: usize, count: usize, norm: NormKind, seed: u64) -> Vec<Point> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|i| {
            if i < dim {
                Point::basis(dim, i)
            } else {
                Point::from_vec_unchecked(sampling::unit_direction(&mut rng, dim, norm))
            }
        })
        .collect()
}

fn is_zero(h: &Point) -> bool {
    h.coords().iter().all(|&v| v == 0.0)
}

/// Linearity and continuity of `h -> f'(x0; h)` on the given directions
/// (rescaled to unit length). Every estimate runs at `tol / 4`.
pub fn gateaux_test(
    f: &VectorMapping,
    spec: &ParaSpec,
    x0: &Point,
    directions: &[Point],
    opts: GateauxOptions,
) -> Result<GateauxReport> {
    let prep = Prepared::new(f, spec)?;
    super::check_point(f, x0)?;
    if directions.is_empty() {
        return Err(Error::Empty("directions"));
    }
    let dnorm = f.domain_norm();
    let cnorm = prep.norm();
    let mut dirs = Vec::with_capacity(directions.len());
    for h in directions {
        h.check_dim(f.domain_dim())?;
        let n = h.norm(dnorm);
        if n == 0.0 {
            return Err(Error::ZeroDirection);
        }
        dirs.push(h.scale(1.0 / n));
    }
    let est_opts = EstimatorOptions { tol: opts.tol / 4.0, ..opts.estimator };
    let mut notes = Vec::new();
    let mut estimate = |h: &Point| -> Result<(Point, f64)> {
        if is_zero(h) {
            return Ok((Point::zeros(f.codomain_dim()), 0.0));
        }
        let e = converged_estimate(f, spec, x0, h, est_opts)?;
        if e.cancellation_warning {
            notes.push(format!("cancellation warning along {:?}", h.coords()));
        }
        Ok((e.value, e.t_used))
    };

    let mut plus = Vec::with_capacity(dirs.len());
    let mut antisymmetry: f64 = 0.0;
    let mut homogeneity: f64 = 0.0;
    for h in &dirs {
        let (d, t) = estimate(h)?;
        let (dm, _) = estimate(&h.scale(-1.0))?;
        antisymmetry = antisymmetry.max((&d + &dm).norm(cnorm));
        for l in [2.0, 0.5] {
            let (dl, _) = estimate(&h.scale(l))?;
            homogeneity = homogeneity.max((&dl - &d.scale(l)).norm(cnorm) / l.max(1.0));
        }
        plus.push((d, t));
    }

    let n = dirs.len();
    let pairs: Vec<(usize, usize)> = match n {
        1 => vec![(0, 0)],
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    };
    let mut additivity: f64 = 0.0;
    for &(i, j) in &pairs {
        let (d, _) = estimate(&(&dirs[i] + &dirs[j]))?;
        additivity = additivity.max((&(&d - &plus[i].0) - &plus[j].0).norm(cnorm));
    }

    // Local Lipschitz estimate around x0, with star pairs through x0 along
    // every direction difference the continuity test uses.
    let r = 0.1f64.min(0.5 * f.domain().boundary_distance(x0.coords()));
    let lo: Vec<f64> = x0.coords().iter().map(|v| v - r).collect();
    let hi: Vec<f64> = x0.coords().iter().map(|v| v + r).collect();
    let region = DomainBox::new(lo, hi)?;
    let mut lpairs = lipschitz_pairs(f, &region, opts.lipschitz_budget, sampling::derive_seed(opts.seed, 3));
    let star = 1e-3 * r;
    for d in pairs.iter().map(|&(i, j)| &dirs[i] - &dirs[j]).chain(dirs.iter().cloned()) {
        let nd = d.norm(dnorm);
        if nd > 0.0 {
            let u = d.scale(star / nd);
            lpairs.push((x0 + &u, x0 - &u));
        }
    }
    let lip = lipschitz_on_pairs(f, spec, &lpairs, sampling::derive_seed(opts.seed, 4), opts.tol)?;
    let l = lip.get("L").map_or(f64::INFINITY, |v| v[0]);
    let gamma = lip.get("gamma").map_or(1.0, |v| v[0]);
    let factor = lip.get("norm_factor").map_or(1.0, |v| v[0]);
    let knorm = spec.k.norm(cnorm);
    let mut continuity = f64::NEG_INFINITY;
    if l.is_finite() {
        for &(i, j) in pairs.iter().filter(|(i, j)| i != j) {
            let ts = plus[i].1.max(plus[j].1);
            let corr = spec.correction_scalar(ts, ts)?;
            let bound = factor * l * knorm * dirs[i].distance(&dirs[j], dnorm) + gamma * corr * knorm;
            continuity = continuity.max((&plus[i].0 - &plus[j].0).norm(cnorm) - bound);
        }
    } else {
        notes.push("no finite local Lipschitz constant; continuity skipped".into());
    }
    let defect = antisymmetry.max(additivity).max(homogeneity).max(continuity);
    Ok(GateauxReport {
        x0: x0.clone(),
        pass: defect <= opts.tol,
        defect,
        antisymmetry,
        additivity,
        homogeneity,
        continuity: continuity.max(0.0),
        directions: dirs,
        derivatives: plus.into_iter().map(|(d, _)| d).collect(),
        lipschitz: l,
        gamma,
        norm_factor: factor,
        tol: opts.tol,
        seed: opts.seed,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: Point,
    pub pass: bool,
    pub defect: f64,
    /// Ground truth from the mapping's kink locus, when it has one.
    pub on_kink_locus: Option<bool>,
}

/// Positive means flagged non-differentiable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    /// Fraction of points that fail the Gateaux test.
    pub failure_density: f64,
    pub confusion: Option<Confusion>,
    pub seed: u64,
}

/// [`gateaux_test`] at seeded uniform points of `region`.
pub fn gateaux_scan(
    f: &VectorMapping,
    spec: &ParaSpec,
    region: &DomainBox,
    n_points: usize,
    n_directions: usize,
    opts: GateauxOptions,
) -> Result<ScanReport> {
    if !f.domain().contains_box(region) {
        return Err(Error::Precondition("region is not inside the domain".into()));
    }
    let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 0));
    let points: Vec<Point> = (0..n_points).map(|_| Point::from_vec_unchecked(region.sample(&mut rng))).collect();
    gateaux_scan_points(f, spec, &points, n_directions, opts)
}

/// [`gateaux_test`] at the given points. Point `i` draws its directions and
/// Lipschitz pairs from seeds derived from `(seed, i)`.
pub fn gateaux_scan_points(
    f: &VectorMapping,
    spec: &ParaSpec,
    points: &[Point],
    n_directions: usize,
    opts: GateauxOptions,
) -> Result<ScanReport> {
    if points.is_empty() {
        return Err(Error::Empty("scan points"));
    }
    let mut out = Vec::with_capacity(points.len());
    let mut confusion = f.kink_locus().map(|_| Confusion::default());
    for (i, x) in points.iter().enumerate() {
        let i = i as u64;
        let dirs = sample_directions(f.domain_dim(), n_directions.max(1), f.domain_norm(), sampling::derive_seed(opts.seed, 2 * i + 1));
        let local = GateauxOptions { seed: sampling::derive_seed(opts.seed, 2 * i + 2), ..opts };
        let r = gateaux_test(f, spec, x, &dirs, local)?;
        let truth = f.kink_locus().map(|k| k.contains(x.coords()));
        if let (Some(c), Some(kink)) = (confusion.as_mut(), truth) {
            match (kink, !r.pass) {
                (true, true) => c.true_positive += 1,
                (false, true) => c.false_positive += 1,
                (false, false) => c.true_negative += 1,
                (true, false) => c.false_negative += 1,
            }
        }
        out.push(ScanPoint { x: x.clone(), pass: r.pass, defect: r.defect, on_kink_locus: truth });
    }
    let failures = out.iter().filter(|p| !p.pass).count();
    Ok(ScanReport { failure_density: failures as f64 / out.len() as f64, points: out, confusion, seed: opts.seed })
}

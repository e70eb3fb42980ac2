use super::{triple_margin, Form, Prepared, TripleSet};
use crate::cone::Point;
use crate::error::Result;
use crate::mapping::VectorMapping;
use crate::modulus::ParaSpec;
use crate::report::{CheckReport, SampleTriple, Witness};
use crate::sampling;

/// Number of halvings per center in the dyadic schedule.
pub const DYADIC_DEPTH: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalsifyOptions {
    pub budget: usize,
    pub seed: u64,
    pub refine: bool,
    pub tol: f64,
}

impl FalsifyOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        FalsifyOptions { budget, seed, refine: false, tol: super::DEFAULT_TOL }
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Symmetric small-gap triples: around each center `c`, the pairs
/// `c -+ (g/2) u` with `g = D 2^-j` (`D` the distance of `c` to the boundary)
/// and `lambda = 1/2`. Centers are the box center, then points on the kink
/// locus (if the mapping has one), then seeded uniform points.
pub fn dyadic_schedule(f: &VectorMapping, count: usize, seed: u64) -> Vec<SampleTriple> {
    let domain = f.domain();
    let mut rng = sampling::rng(seed);
    let mut centers = vec![domain.center().into_vec()];
    if let Some(locus) = f.kink_locus() {
        for &c in &locus.coords {
            let mut p = domain.center().into_vec();
            p[locus.axis] = c;
            if domain.contains(&p) {
                centers.push(p);
            }
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut index = 0;
    while out.len() < count {
        let c = if index < centers.len() { centers[index].clone() } else { domain.sample(&mut rng) };
        index += 1;
        let u = sampling::unit_direction(&mut rng, domain.dim(), f.domain_norm());
        let d = domain.boundary_distance(&c);
        let uc = Point::from_vec_unchecked(u);
        let cp = Point::from_vec_unchecked(c);
        for j in 0..DYADIC_DEPTH {
            if out.len() == count {
                break;
            }
            let half = 0.5 * d * 0.5f64.powi(j as i32);
            let x = cp.axpy(-half, &uc);
            let y = cp.axpy(half, &uc);
            if domain.contains(x.coords()) && domain.contains(y.coords()) && x != y {
                out.push(SampleTriple::new(x, y, 0.5));
            }
        }
    }
    out
}

/// Searches for a triple violating the inequality: the dyadic schedule
/// (half the budget, at least one full center), then uniform triples, then
/// optionally coordinate descent on the margin from the worst triple (a
/// tenth of the budget).
pub fn falsify(f: &VectorMapping, spec: &ParaSpec, form: Form, opts: FalsifyOptions) -> Result<CheckReport> {
    let prep = Prepared::new(f, spec)?;
    let budget = opts.budget;
    let n_struct = budget.min((budget / 2).max(DYADIC_DEPTH));
    let n_refine = if opts.refine { (budget / 10).min(budget - n_struct) } else { 0 };
    let n_rand = budget - n_struct - n_refine;

    let mut report = CheckReport::new(opts.tol, opts.seed);
    let mut phase = "none";
    let run = |t: SampleTriple, name: &'static str, report: &mut CheckReport, phase: &mut &'static str| -> Result<f64> {
        let m = triple_margin(f, spec, form, &prep, &t)?;
        if m < report.worst_margin {
            *phase = name;
        }
        report.observe(m, || Witness::Triple(t));
        Ok(m)
    };

    for t in dyadic_schedule(f, n_struct, sampling::derive_seed(opts.seed, 0)) {
        run(t, "dyadic", &mut report, &mut phase)?;
    }
    for t in TripleSet::uniform(f.domain(), n_rand, sampling::derive_seed(opts.seed, 1)).triples {
        run(t, "random", &mut report, &mut phase)?;
    }
    if n_refine > 0 {
        if let Some(Witness::Triple(t0)) = report.witness.clone() {
            let m0 = report.worst_margin;
            refine(f, t0, m0, n_refine, |t| run(t, "refine", &mut report, &mut phase))?;
        }
    }
    report.note(format!("dyadic={n_struct} random={n_rand} refine={n_refine} worst_phase={phase}"));
    Ok(report.finish())
}

/// Coordinate descent over `(x, y, lambda)` that accepts any decrease of the
/// margin and halves the steps after an unproductive sweep.
fn refine(
    f: &VectorMapping,
    start: SampleTriple,
    start_margin: f64,
    budget: usize,
    mut eval: impl FnMut(SampleTriple) -> Result<f64>,
) -> Result<()> {
    let d = f.domain_dim();
    let domain = f.domain();
    let mut z: Vec<f64> = start.x.coords().iter().chain(start.y.coords()).copied().collect();
    z.push(start.lambda);
    let mut steps: Vec<f64> = (0..2 * d)
        .map(|i| 0.05 * (domain.upper()[i % d] - domain.lower()[i % d]))
        .collect();
    steps.push(0.1);
    let mut best = start_margin;
    let mut used = 0;
    while used < budget {
        let mut improved = false;
        for i in 0..z.len() {
            for sign in [-1.0, 1.0] {
                if used >= budget {
                    return Ok(());
                }
                let mut cand = z.clone();
                cand[i] += sign * steps[i];
                let (x, y, lambda) = (&cand[..d], &cand[d..2 * d], cand[2 * d]);
                if !(domain.contains(x) && domain.contains(y) && (0.0..=1.0).contains(&lambda)) {
                    continue;
                }
                used += 1;
                let t = SampleTriple::new(Point::from_vec_unchecked(x.to_vec()), Point::from_vec_unchecked(y.to_vec()), lambda);
                let m = eval(t)?;
                if m < best {
                    best = m;
                    z = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
            if steps.iter().all(|&s| s < 1e-14) {
                break;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::check_inequality;
    use super::*;
    use crate::cone::{NormKind, PolyCone};
    use crate::mapping::{make_piecewise_scalar, DomainBox, PiecewiseLinear};
    use crate::modulus::Modulus;

    fn neg_abs() -> VectorMapping {
        make_piecewise_scalar(PiecewiseLinear::new(0.0, 1.0, vec![(0.0, -1.0)]).unwrap(), DomainBox::symmetric(1, 1.0).unwrap())
            .unwrap()
    }

    fn spec(c: f64) -> ParaSpec {
        let cone = Arc::new(PolyCone::orthant(1, NormKind::Sup).unwrap());
        ParaSpec::min_form(Modulus::square(1.0), c, Point::filled(1, 1.0), cone).unwrap()
    }

    #[test]
    fn neg_abs_falsified_at_small_gap() {
        // Oracle: at lambda = 1/2, x = -t, y = t the slack is -t + 2 C t^2.
        let t: f64 = 0.01;
        assert!(-t + 2.0 * 10.0 * t * t < 0.0);
        let f = neg_abs();
        for c in [0.5, 1.0, 10.0] {
            let r = falsify(&f, &spec(c), Form::Min, FalsifyOptions::new(1000, 9)).unwrap();
            assert!(!r.pass);
            let Some(Witness::Triple(w)) = r.witness.clone() else { panic!() };
            assert!(w.x.distance(&w.y, NormKind::Two) < 1.0 / c);
            let replay = check_inequality(&f, &spec(c), Form::Min, &TripleSet::from_triples(0, vec![w]), 1e-9).unwrap();
            assert!(!replay.pass);
            assert_eq!(replay.worst_margin, r.worst_margin);
        }
    }

    #[test]
    fn convex_abs_passes() {
        let f = make_piecewise_scalar(PiecewiseLinear::abs(0.0), DomainBox::symmetric(1, 1.0).unwrap()).unwrap();
        for budget in [10, 100, 5000] {
            let r = falsify(&f, &spec(0.0), Form::Min, FalsifyOptions::new(budget, 1)).unwrap();
            assert!(r.pass);
            assert_eq!(r.samples_used, budget);
            let r = falsify(&f, &spec(0.0), Form::Min, FalsifyOptions::new(budget, 1).with_refine(true)).unwrap();
            assert!(r.pass);
            assert!(r.samples_used <= budget);
        }
    }

    #[test]
    fn refinement_deepens_a_violation() {
        let f = VectorMapping::from_fn("neg-sq", DomainBox::symmetric(1, 1.0).unwrap(), 1, |x| vec![-x[0] * x[0]]).unwrap();
        let cone = Arc::new(PolyCone::orthant(1, NormKind::Sup).unwrap());
        let s = ParaSpec::new(Modulus::square(1.0), 0.9, 0.9, Point::filled(1, 1.0), cone).unwrap();
        let plain = falsify(&f, &s, Form::Lambda, FalsifyOptions::new(200, 2)).unwrap();
        let refined = falsify(&f, &s, Form::Lambda, FalsifyOptions::new(200, 2).with_refine(true)).unwrap();
        assert!(!plain.pass && !refined.pass);
        assert!(refined.samples_used <= 200);
    }

    #[test]
    fn dyadic_schedule_gaps_halve() {
        let f = neg_abs();
        let s = dyadic_schedule(&f, 40, 0);
        assert_eq!(s.len(), 40);
        for w in s.windows(2) {
            let g0 = w[0].x.distance(&w[0].y, NormKind::Two);
            let g1 = w[1].x.distance(&w[1].y, NormKind::Two);
            assert!((g0 / g1 - 2.0).abs() < 1e-9);
        }
        assert!(s.iter().all(|t| t.lambda == 0.5 && (t.mix()[0]).abs() < 1e-15));
    }
}

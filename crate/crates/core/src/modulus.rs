//! Moduli `alpha : [0, inf) -> [0, inf)`, nondecreasing with
//! `alpha(t) / t -> 0` as `t -> 0+`, and the paraconvexity data built on them.

use std::sync::Arc;

use serde::Serialize;

use crate::cone::{PolyCone, Point};
use crate::error::{Error, Result};
use crate::report::{CheckReport, Witness};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusKind {
    Zero,
    Square,
    Power { p: f64 },
    /// Sorted knots `(t, alpha(t))` with `t > 0`; `(0, 0)` is implicit.
    Table { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Modulus {
    #[serde(flatten)]
    pub kind: ModulusKind,
    pub scale: f64,
}

impl Modulus {
    pub fn zero() -> Self {
        Modulus { kind: ModulusKind::Zero, scale: 0.0 }
    }

    pub fn square(scale: f64) -> Self {
        Modulus { kind: ModulusKind::Square, scale }
    }

    /// `scale * t^p`. Exponents `p <= 1` are accepted here so that they can be
    /// rejected by [`verify_modulus`].
    pub fn power(p: f64, scale: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidModulus(format!("exponent {p} must be positive")));
        }
        Self::check_scale(scale)?;
        Ok(Modulus { kind: ModulusKind::Power { p }, scale })
    }

    pub fn table(knots: Vec<(f64, f64)>, scale: f64) -> Result<Self> {
        Self::check_scale(scale)?;
        if knots.is_empty() {
            return Err(Error::InvalidModulus("table needs at least one knot".into()));
        }
        let mut prev = (0.0, 0.0);
        for &(t, a) in &knots {
            if !(t.is_finite() && a.is_finite()) {
                return Err(Error::InvalidModulus("non-finite knot".into()));
            }
            if t <= prev.0 {
                return Err(Error::InvalidModulus(format!("knot positions must increase strictly from 0 (got {t})")));
            }
            if a < prev.1 {
                return Err(Error::InvalidModulus(format!("table values must be nondecreasing (got {a} after {})", prev.1)));
            }
            prev = (t, a);
        }
        Ok(Modulus { kind: ModulusKind::Table { knots }, scale })
    }

    fn check_scale(scale: f64) -> Result<()> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModulus(format!("scale {scale} must be finite and >= 0")));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ModulusKind::Zero) || self.scale == 0.0
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeArgument(t));
        }
        let raw = match &self.kind {
            ModulusKind::Zero => return Ok(0.0),
            ModulusKind::Square => t * t,
            ModulusKind::Power { p } => t.powf(*p),
            ModulusKind::Table { knots } => {
                let last = knots[knots.len() - 1].0;
                if t > last {
                    return Err(Error::TableExtrapolation { t, last });
                }
                let mut lo = (0.0, 0.0);
                let mut value = 0.0;
                for &(kt, ka) in knots {
                    if t <= kt {
                        value = lo.1 + (ka - lo.1) * (t - lo.0) / (kt - lo.0);
                        break;
                    }
                    lo = (kt, ka);
                }
                value
            }
        };
        Ok(self.scale * raw)
    }

    /// `alpha(t) / t` for `t > 0`.
    pub fn ratio(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::InvalidParameter(format!("ratio alpha(t)/t needs t > 0 (got {t})")));
        }
        Ok(self.eval(t)? / t)
    }
}

/// `start, start*ratio, ..., start*ratio^(count-1)`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| start * ratio.powi(j as i32)).collect()
}

/// Finite certificate for the modulus conditions on a positive grid.
///
/// Passes when alpha is nondecreasing on the grid, `alpha(t_min)/t_min` is at
/// most `ratio_threshold`, and the ratio `alpha(t)/t` is nonincreasing as `t`
/// decreases through the smaller half of the grid.
pub fn verify_modulus(m: &Modulus, grid: &[f64], ratio_threshold: f64) -> Result<CheckReport> {
    if grid.is_empty() {
        return Err(Error::Empty("modulus grid"));
    }
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("modulus grid needs at least two points".into()));
    }
    if grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("modulus grid points must be positive".into()));
    }
    let mut ts = grid.to_vec();
    ts.sort_by(|a, b| b.total_cmp(a));
    ts.dedup();

    let mut report = CheckReport::new(1e-12, 0);
    let values: Vec<f64> = ts.iter().map(|&t| m.eval(t)).collect::<Result<_>>()?;
    let ratios: Vec<f64> = ts.iter().zip(&values).map(|(t, a)| a / t).collect();

    // ts descending: alpha must not increase along it.
    for i in 0..ts.len() - 1 {
        report.observe(values[i] - values[i + 1], || Witness::Step { t: ts[i + 1] });
    }
    let t_min = ts[ts.len() - 1];
    let r_min = ratios[ratios.len() - 1];
    report.observe(ratio_threshold - r_min, || Witness::Step { t: t_min });
    let tail_start = ts.len() / 2;
    for i in tail_start..ts.len() - 1 {
        report.observe(ratios[i] - ratios[i + 1], || Witness::Step { t: ts[i + 1] });
    }
    report.quantity("ratio_at_t_min", vec![r_min]);
    Ok(report.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conversion {
    MinToLambda,
    LambdaToMin,
}

/// Paraconvexity data: modulus, the two constants and the direction `k`.
///
/// `c` is the constant of the `min{lambda, 1-lambda}` form and `c1` the
/// constant of the `lambda(1-lambda)` form. Since
/// `lambda(1-lambda) <= min{lambda, 1-lambda} <= 2 lambda(1-lambda)`, a valid
/// `c` gives a valid `c1 = 2c` and a valid `c1` gives a valid `c = c1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParaSpec {
    pub modulus: Modulus,
    pub c: f64,
    pub c1: f64,
    pub k: Point,
    #[serde(serialize_with = "cone_name")]
    pub cone: Arc<PolyCone>,
}

fn cone_name<S: serde::Serializer>(cone: &Arc<PolyCone>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(cone.name())
}

impl ParaSpec {
    pub fn new(modulus: Modulus, c: f64, c1: f64, k: Point, cone: Arc<PolyCone>) -> Result<Self> {
        for (name, v) in [("C", c), ("C1", c1)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        k.check_dim(cone.dim())?;
        if !cone.contains(&k, 1e-12)? {
            return Err(Error::KOutsideCone { cone: cone.name().to_string(), k: k.into_vec() });
        }
        Ok(ParaSpec { modulus, c, c1, k, cone })
    }

    /// From a min-form constant; `c1 = 2c`.
    pub fn min_form(modulus: Modulus, c: f64, k: Point, cone: Arc<PolyCone>) -> Result<Self> {
        Self::new(modulus, c, 2.0 * c, k, cone)
    }

    /// From a lambda-form constant; `c = c1`.
    pub fn lambda_form(modulus: Modulus, c1: f64, k: Point, cone: Arc<PolyCone>) -> Result<Self> {
        Self::new(modulus, c1, c1, k, cone)
    }

    pub fn convert_constants(&self, direction: Conversion) -> ParaSpec {
        let mut out = self.clone();
        match direction {
            Conversion::MinToLambda => out.c1 = 2.0 * self.c,
            Conversion::LambdaToMin => out.c = self.c1,
        }
        out
    }

    pub fn with_cone(&self, cone: Arc<PolyCone>, k: Point) -> Result<ParaSpec> {
        ParaSpec::new(self.modulus.clone(), self.c, self.c1, k, cone)
    }

    pub fn with_constants(&self, c: f64, c1: f64) -> Result<ParaSpec> {
        ParaSpec::new(self.modulus.clone(), c, c1, self.k.clone(), self.cone.clone())
    }

    /// Min-form correction `C alpha(s) / t * k` for a step `t` whose length
    /// in the domain norm is `s`.
    pub fn correction_scalar(&self, s: f64, t: f64) -> Result<f64> {
        if self.c == 0.0 || self.modulus.is_zero() {
            return Ok(0.0);
        }
        Ok(self.c * self.modulus.eval(s)? / t)
    }
}

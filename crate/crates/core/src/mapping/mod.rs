//! Evaluable vector mappings on open boxes, with claimed paraconvexity data
//! and optional analytic directional derivatives.

mod families;
mod parts;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::{NormKind, Point};
use crate::error::{Error, Result};
use crate::modulus::ParaSpec;
use crate::sampling::{self, SeededRng};

pub use families::{
    make_affine, make_example1, make_piecewise_scalar, make_quadratic, make_semiconvex_scalar, testbed, Example1Config,
    CURVATURE_AUDIT_POINTS,
};
pub use parts::{PiecewiseLinear, SmoothPart, SmoothTerm};

/// An open box `prod (lower_i, upper_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::Empty("domain box"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("domain bounds (boxes must be bounded)"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] >= upper[i]) {
            return Err(Error::InvalidParameter(format!(
                "empty interval on axis {i}: ({}, {})",
                lower[i], upper[i]
            )));
        }
        Ok(DomainBox { lower, upper })
    }

    /// `(-r, r)^dim`
    pub fn symmetric(dim: usize, r: f64) -> Result<Self> {
        Self::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Point {
        Point::from_vec_unchecked(self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    /// Strict (open) membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (a, b))| a < v && v < b)
    }

    /// Sup-norm distance of an interior point to the boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (a, b))| (v - a).min(b - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `t` with `x + s h` inside for every `0 <= s < t`.
    pub fn exit_time(&self, x: &[f64], h: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..x.len() {
            if h[i] > 0.0 {
                t = t.min((self.upper[i] - x[i]) / h[i]);
            } else if h[i] < 0.0 {
                t = t.min((self.lower[i] - x[i]) / h[i]);
            }
        }
        t
    }

    /// Whether the closed ball of `radius` around `x` lies in the open box.
    /// The axis points `x +- radius e_i` belong to every norm ball and all
    /// balls sit inside the sup ball, so the test is norm independent.
    pub fn contains_ball(&self, x: &[f64], radius: f64) -> bool {
        self.contains(x) && radius < self.boundary_distance(x)
    }

    /// Whether `other` (as an open box) lies inside `self`.
    pub fn contains_box(&self, other: &DomainBox) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| other.lower[i] >= self.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// A uniform point of the open box.
    pub fn sample(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(&a, &b)| sampling::open_uniform(rng, a, b)).collect()
    }
}

/// Points `{x : x[axis] = c}` for `c` in `coords`, where the mapping is not
/// differentiable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinkLocus {
    pub axis: usize,
    pub coords: Vec<f64>,
}

impl KinkLocus {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.get(self.axis).is_some_and(|v| self.coords.contains(v))
    }
}

/// Deterministic, reentrant implementation of a mapping.
pub trait Evaluator: Send + Sync {
    fn eval(&self, x: &[f64]) -> Vec<f64>;

    /// `f'(x0; h)` when known in closed form.
    fn directional(&self, _x0: &[f64], _h: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

struct FnEvaluator<F, D> {
    f: F,
    d: Option<D>,
}

type DirFn = Box<dyn Fn(&[f64], &[f64]) -> Option<Vec<f64>> + Send + Sync>;

impl<F> Evaluator for FnEvaluator<F, DirFn>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    fn directional(&self, x0: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        self.d.as_ref().and_then(|d| d(x0, h))
    }
}

/// `f : Omega -> R^m` with `Omega` an open box in `R^d`.
#[derive(Clone)]
pub struct VectorMapping {
    label: String,
    domain: DomainBox,
    domain_norm: NormKind,
    codomain_dim: usize,
    evaluator: Arc<dyn Evaluator>,
    claimed: Option<ParaSpec>,
    kink_locus: Option<KinkLocus>,
}

impl fmt::Debug for VectorMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorMapping")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("domain_norm", &self.domain_norm)
            .field("codomain_dim", &self.codomain_dim)
            .field("claimed", &self.claimed)
            .field("kink_locus", &self.kink_locus)
            .finish_non_exhaustive()
    }
}

impl VectorMapping {
    pub fn new(
        label: impl Into<String>,
        domain: DomainBox,
        codomain_dim: usize,
        evaluator: Arc<dyn Evaluator>,
    ) -> Result<Self> {
        if codomain_dim == 0 {
            return Err(Error::Empty("codomain"));
        }
        Ok(VectorMapping {
            label: label.into(),
            domain,
            domain_norm: NormKind::Two,
            codomain_dim,
            evaluator,
            claimed: None,
            kink_locus: None,
        })
    }

    /// Wraps a closure.
    pub fn from_fn<F>(label: impl Into<String>, domain: DomainBox, codomain_dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(label, domain, codomain_dim, Arc::new(FnEvaluator::<F, DirFn> { f, d: None }))
    }

    /// Wraps a closure together with its directional derivative.
    pub fn from_fn_with_directional<F, D>(
        label: impl Into<String>,
        domain: DomainBox,
        codomain_dim: usize,
        f: F,
        d: D,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(&[f64], &[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    {
        let d: DirFn = Box::new(d);
        Self::new(label, domain, codomain_dim, Arc::new(FnEvaluator { f, d: Some(d) }))
    }

    pub fn with_claimed(mut self, spec: ParaSpec) -> Result<Self> {
        spec.k.check_dim(self.codomain_dim)?;
        self.claimed = Some(spec);
        Ok(self)
    }

    pub fn without_claim(mut self) -> Self {
        self.claimed = None;
        self
    }

    pub fn with_domain_norm(mut self, norm: NormKind) -> Self {
        self.domain_norm = norm;
        self
    }

    pub fn with_kink_locus(mut self, locus: KinkLocus) -> Self {
        self.kink_locus = Some(locus);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn domain_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain_norm(&self) -> NormKind {
        self.domain_norm
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn claimed(&self) -> Option<&ParaSpec> {
        self.claimed.as_ref()
    }

    pub fn kink_locus(&self) -> Option<&KinkLocus> {
        self.kink_locus.as_ref()
    }

    /// `f(x)`; points outside the open box are rejected, never clamped.
    pub fn eval(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.domain_dim())?;
        if !self.domain.contains(x.coords()) {
            return Err(Error::OutsideDomain { point: x.coords().to_vec() });
        }
        let y = self.evaluator.eval(x.coords());
        if y.len() != self.codomain_dim {
            return Err(Error::DimensionMismatch { expected: self.codomain_dim, got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mapping value"));
        }
        Ok(Point::from_vec_unchecked(y))
    }

    /// Analytic `f'(x0; h)` if the family provides one.
    pub fn known_directional(&self, x0: &Point, h: &Point) -> Option<Point> {
        if x0.dim() != self.domain_dim() || h.dim() != self.domain_dim() || !self.domain.contains(x0.coords()) {
            return None;
        }
        self.evaluator
            .directional(x0.coords(), h.coords())
            .filter(|v| v.len() == self.codomain_dim && v.iter().all(|c| c.is_finite()))
            .map(Point::from_vec_unchecked)
    }
}

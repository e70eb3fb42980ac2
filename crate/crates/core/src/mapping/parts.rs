//! Scalar building blocks: piecewise-linear parts and smooth parts with a
//! known second derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `u(x) = offset + slope0 * x + sum_j (s_j - s_{j-1}) * max(0, x - p_j)`
///
/// `kinks` holds `(p_j, s_j)`: the position and the slope to the right of it,
/// sorted by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub offset: f64,
    pub slope0: f64,
    pub kinks: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(offset: f64, slope0: f64, kinks: Vec<(f64, f64)>) -> Result<Self> {
        if !(offset.is_finite() && slope0.is_finite()) {
            return Err(Error::NonFinite("piecewise-linear coefficients"));
        }
        for w in kinks.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter(format!(
                    "kink positions must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if kinks.iter().any(|(p, s)| !(p.is_finite() && s.is_finite())) {
            return Err(Error::NonFinite("kink list"));
        }
        Ok(PiecewiseLinear { offset, slope0, kinks })
    }

    pub fn zero() -> Self {
        PiecewiseLinear { offset: 0.0, slope0: 0.0, kinks: Vec::new() }
    }

    /// |x - at|
    pub fn abs(at: f64) -> Self {
        PiecewiseLinear { offset: 0.0, slope0: -1.0, kinks: vec![(at, 1.0)] }.shifted(at)
    }

    fn shifted(mut self, at: f64) -> Self {
        // slope0 * x must vanish at `at` for |x - at|.
        self.offset = -self.slope0 * at;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.offset + self.slope0 * x;
        let mut prev = self.slope0;
        for &(p, s) in &self.kinks {
            if x > p {
                v += (s - prev) * (x - p);
            }
            prev = s;
        }
        v
    }

    /// Slope immediately to the right of `x`.
    pub fn right_slope(&self, x: f64) -> f64 {
        let mut s = self.slope0;
        for &(p, after) in &self.kinks {
            if x >= p {
                s = after;
            }
        }
        s
    }

    /// Slope immediately to the left of `x`.
    pub fn left_slope(&self, x: f64) -> f64 {
        let mut s = self.slope0;
        for &(p, after) in &self.kinks {
            if x > p {
                s = after;
            }
        }
        s
    }

    /// One-sided derivative at `x` in direction `h`.
    pub fn directional(&self, x: f64, h: f64) -> f64 {
        if h >= 0.0 {
            self.right_slope(x) * h
        } else {
            self.left_slope(x) * h
        }
    }

    pub fn is_kink(&self, x: f64) -> bool {
        self.kinks.iter().any(|&(p, _)| p == x)
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.kinks.iter().map(|&(p, _)| p)
    }

    /// First slope decrease, if any: `(position, before, after)`.
    pub fn convexity_violation(&self) -> Option<(f64, f64, f64)> {
        let mut prev = self.slope0;
        for &(p, s) in &self.kinks {
            if s < prev {
                return Some((p, prev, s));
            }
            prev = s;
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothTerm {
    /// a x^2 + b x + c
    Quadratic { a: f64, b: f64, c: f64 },
    /// amp * sin(freq * x + phase)
    Sine { amp: f64, freq: f64, phase: f64 },
}

impl SmoothTerm {
    fn value(&self, x: f64) -> f64 {
        match *self {
            SmoothTerm::Quadratic { a, b, c } => (a * x + b) * x + c,
            SmoothTerm::Sine { amp, freq, phase } => amp * (freq * x + phase).sin(),
        }
    }

    fn d1(&self, x: f64) -> f64 {
        match *self {
            SmoothTerm::Quadratic { a, b, .. } => 2.0 * a * x + b,
            SmoothTerm::Sine { amp, freq, phase } => amp * freq * (freq * x + phase).cos(),
        }
    }

    fn d2(&self, x: f64) -> f64 {
        match *self {
            SmoothTerm::Quadratic { a, .. } => 2.0 * a,
            SmoothTerm::Sine { amp, freq, phase } => -amp * freq * freq * (freq * x + phase).sin(),
        }
    }
}

/// A finite sum of smooth terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SmoothPart(pub Vec<SmoothTerm>);

impl SmoothPart {
    pub fn zero() -> Self {
        SmoothPart(Vec::new())
    }

    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        SmoothPart(vec![SmoothTerm::Quadratic { a, b, c }])
    }

    pub fn value(&self, x: f64) -> f64 {
        self.0.iter().map(|t| t.value(x)).sum()
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.0.iter().map(|t| t.d1(x)).sum()
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.0.iter().map(|t| t.d2(x)).sum()
    }

    /// Largest |u''| on an evenly spaced closed grid over `[lo, hi]`.
    pub fn curvature_sup(&self, lo: f64, hi: f64, points: usize) -> (f64, f64) {
        let n = points.max(2);
        let mut best = (0.0, lo);
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let c = self.d2(x).abs();
            if c > best.0 {
                best = (c, x);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_value_and_slopes() {
        let u = PiecewiseLinear::abs(0.0);
        assert_eq!(u.eval(-0.3), 0.3);
        assert_eq!(u.eval(0.7), 0.7);
        assert_eq!(u.directional(0.0, 1.0), 1.0);
        assert_eq!(u.directional(0.0, -1.0), 1.0);
        assert!(u.is_kink(0.0));
        let shifted = PiecewiseLinear::abs(0.25);
        assert_eq!(shifted.eval(0.25), 0.0);
        assert_eq!(shifted.eval(1.25), 1.0);
    }

    #[test]
    fn relu_slopes() {
        let u = PiecewiseLinear::new(0.0, 0.0, vec![(0.0, 1.0)]).unwrap();
        assert_eq!(u.directional(0.0, 1.0), 1.0);
        assert_eq!(u.directional(0.0, -1.0), 0.0);
        assert_eq!(u.eval(-2.0), 0.0);
    }

    #[test]
    fn convexity_violation_detected() {
        let u = PiecewiseLinear::new(0.0, 1.0, vec![(0.0, 0.0)]).unwrap();
        assert_eq!(u.convexity_violation(), Some((0.0, 1.0, 0.0)));
        assert!(PiecewiseLinear::abs(0.0).convexity_violation().is_none());
        assert!(PiecewiseLinear::new(0.0, 0.0, vec![(0.5, 1.0), (0.2, 2.0)]).is_err());
    }

    #[test]
    fn smooth_derivatives_match_central_differences() {
        let s = SmoothPart(vec![
            SmoothTerm::Quadratic { a: -0.5, b: 0.2, c: 1.0 },
            SmoothTerm::Sine { amp: 0.1, freq: 3.0, phase: 0.4 },
        ]);
        let h = 1e-5;
        for &x in &[-0.7, 0.0, 0.3, 0.9] {
            let d1 = (s.value(x + h) - s.value(x - h)) / (2.0 * h);
            let d2 = (s.d1(x + h) - s.d1(x - h)) / (2.0 * h);
            assert!((d1 - s.d1(x)).abs() < 1e-8);
            assert!((d2 - s.d2(x)).abs() < 1e-8);
        }
        let (sup, _) = SmoothPart::quadratic(-1.0, 0.0, 0.0).curvature_sup(-1.0, 1.0, 11);
        assert_eq!(sup, 2.0);
    }
}

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cone::Point;

/// One quantified instance `(x, y, lambda)` of a convexity-type inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleTriple {
    pub x: Point,
    pub y: Point,
    pub lambda: f64,
}

impl SampleTriple {
    pub fn new(x: Point, y: Point, lambda: f64) -> Self {
        SampleTriple { x, y, lambda }
    }

    /// `lambda x + (1 - lambda) y`
    pub fn mix(&self) -> Point {
        self.x.convex_combination(self.lambda, &self.y)
    }
}

/// The input that produced the worst observed margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Triple(SampleTriple),
    Point { x: Point },
    Pair { x: Point, y: Point },
    /// Grid pair of a quotient trace (`t1 < t`).
    Steps { t1: f64, t: f64 },
    /// A grid step of a quotient trace or a modulus grid.
    Step { t: f64 },
    Direction { h: Point, t: f64 },
    Directions { h1: Point, h2: Point },
}

/// Outcome of a checker.
///
/// `pass` holds exactly when `worst_margin >= -tol`. Margins are reported in
/// the checker's scalarized metric (normalized dual functionals, divided by
/// any magnitude scaling the checker applies).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub samples_used: usize,
    pub tol: f64,
    pub seed: u64,
    pub notes: Vec<String>,
    /// Named estimates produced along the way (Lipschitz constant `L`,
    /// bound witnesses, constants).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub quantities: BTreeMap<String, Vec<f64>>,
}

impl CheckReport {
    pub(crate) fn new(tol: f64, seed: u64) -> Self {
        CheckReport {
            pass: true,
            worst_margin: f64::INFINITY,
            witness: None,
            samples_used: 0,
            tol,
            seed,
            notes: Vec::new(),
            quantities: BTreeMap::new(),
        }
    }

    /// Records one margin; keeps the witness of the smallest.
    pub(crate) fn observe(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        self.samples_used += 1;
        if margin < self.worst_margin || (margin.is_nan() && !self.worst_margin.is_nan()) {
            self.worst_margin = margin;
            self.witness = Some(witness());
        }
    }

    /// Fixes `pass` from the margin; call once all samples are in.
    pub(crate) fn finish(mut self) -> Self {
        if self.worst_margin == f64::INFINITY {
            self.worst_margin = 0.0;
        }
        self.pass = self.worst_margin >= -self.tol;
        self
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub(crate) fn quantity(&mut self, name: &str, values: Vec<f64>) {
        self.quantities.insert(name.to_string(), values);
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.quantities.get(name).map(|v| v.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_margin_within_tol() {
        let mut r = CheckReport::new(1e-9, 0);
        r.observe(-1e-10, || Witness::Step { t: 1.0 });
        r.observe(0.5, || Witness::Step { t: 2.0 });
        let r = r.finish();
        assert!(r.pass);
        assert_eq!(r.witness, Some(Witness::Step { t: 1.0 }));
        let mut r = CheckReport::new(1e-9, 0);
        r.observe(-1e-8, || Witness::Step { t: 1.0 });
        assert!(!r.finish().pass);
    }

    #[test]
    fn nan_margin_fails() {
        let mut r = CheckReport::new(1e-9, 0);
        r.observe(1.0, || Witness::Step { t: 1.0 });
        r.observe(f64::NAN, || Witness::Step { t: 2.0 });
        assert!(!r.finish().pass);
    }
}

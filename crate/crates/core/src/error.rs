use thiserror::Error;

/// Errors raised by the cone kernel, the testbed and the checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("cone `{0}` has no usable representation for this operation")]
    NoRepresentation(String),

    #[error("cone `{0}` is degenerate (all generators vanish)")]
    DegenerateCone(String),

    #[error("cone `{0}` is trivial")]
    TrivialCone(String),

    #[error("cone `{0}` is not pointed")]
    NotPointed(String),

    #[error("cone `{0}` is not full-dimensional")]
    NotFullDimensional(String),

    #[error("dual ray enumeration supports dimension <= {max}; cone `{name}` has dimension {dim}, supply dual generators")]
    DualEnumerationLimit { name: String, dim: usize, max: usize },

    #[error("functional is not strictly positive on generator {index} of cone `{cone}` (value {value})")]
    NoBase { cone: String, index: usize, value: f64 },

    #[error("functional does not belong to the dual of cone `{0}`")]
    NotInDual(String),

    #[error("k = {k:?} is not in cone `{cone}`")]
    KOutsideCone { cone: String, k: Vec<f64> },

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("modulus evaluated at negative argument {0}")]
    NegativeArgument(f64),

    #[error("modulus table does not extrapolate beyond t = {last} (requested {t})")]
    TableExtrapolation { t: f64, last: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {point:?} lies outside the open domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("u1 of component {component} is not convex: slope drops from {before} to {after} at {position}")]
    NonConvex { component: usize, position: f64, before: f64, after: f64 },

    #[error("u2 of component {component} violates the curvature bound: |u2''| = {observed} > {bound} at x = {at}")]
    CurvatureBound { component: usize, at: f64, observed: f64, bound: f64 },

    #[error("direction is not unit length (norm {0})")]
    NotUnit(f64),

    #[error("direction is zero")]
    ZeroDirection,

    #[error("directional derivative did not converge at x0 = {x0:?}, h = {h:?} (error bound {error_bound})")]
    NotConverged { x0: Vec<f64>, h: Vec<f64>, error_bound: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("empty {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Experiment configuration: TOML parsing, validation with line numbers, and
//! resolution into library objects.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use paracone::mapping::{make_affine, make_example1, make_piecewise_scalar, make_quadratic, make_semiconvex_scalar};
use paracone::mapping::{Example1Config, PiecewiseLinear, SmoothPart, SmoothTerm};
use paracone::paraconvex::Form;
use paracone::{DomainBox, Modulus, NormKind, ParaSpec, Point, PolyCone, VectorMapping};
use serde::Deserialize;
use toml::Spanned;

/// A configuration problem, located by line when the source is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    output: Option<OutputConfig>,
    #[serde(default)]
    cones: Vec<Spanned<ConeConfig>>,
    modulus: Option<Spanned<ModulusConfig>>,
    mapping: Spanned<MappingConfig>,
    spec: Option<Spanned<SpecConfig>>,
    #[serde(default)]
    checks: Vec<Spanned<CheckConfig>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputConfig {
    dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeConfig {
    name: String,
    dim: usize,
    #[serde(default)]
    orthant: bool,
    generators: Option<Vec<Vec<f64>>>,
    dual_generators: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    norm: NormKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModulusConfig {
    kind: String,
    p: Option<f64>,
    knots: Option<Vec<(f64, f64)>>,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxConfig {
    fn resolve(&self) -> paracone::Result<DomainBox> {
        DomainBox::new(self.lower.clone(), self.upper.clone())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseConfig {
    #[serde(default)]
    offset: f64,
    slope0: f64,
    #[serde(default)]
    kinks: Vec<(f64, f64)>,
}

impl PiecewiseConfig {
    fn resolve(&self) -> paracone::Result<PiecewiseLinear> {
        PiecewiseLinear::new(self.offset, self.slope0, self.kinks.clone())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentConfig {
    u1: PiecewiseConfig,
    #[serde(default)]
    u2: Vec<SmoothTerm>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
enum MappingConfig {
    Affine {
        domain: BoxConfig,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Quadratic {
        domain: BoxConfig,
        q: Vec<Vec<Vec<f64>>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
        k: Vec<f64>,
    },
    Semiconvex {
        domain: BoxConfig,
        u1: PiecewiseConfig,
        #[serde(default)]
        u2: Vec<SmoothTerm>,
        c: f64,
    },
    Piecewise {
        domain: BoxConfig,
        u: PiecewiseConfig,
    },
    Example1 {
        domain: BoxConfig,
        k: Vec<f64>,
        c: f64,
        components: Vec<ComponentConfig>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecConfig {
    cone: String,
    k: Vec<f64>,
    c: Option<f64>,
    c1: Option<f64>,
}

/// One `[[checks]]` entry. Which fields apply depends on `kind`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub kind: String,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub form: Option<Form>,
    pub refine: Option<bool>,
    pub x0: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub functional: Option<Vec<f64>>,
    pub functionals: Option<Vec<Vec<f64>>>,
    pub region: Option<BoxConfig>,
    pub t0: Option<f64>,
    pub ratio: Option<f64>,
    pub depth: Option<usize>,
    pub directions: Option<Vec<Vec<f64>>>,
    pub n_directions: Option<usize>,
    pub points: Option<Vec<Vec<f64>>>,
    pub epsilons: Option<Vec<f64>>,
    pub steps: Option<Vec<f64>>,
    pub lambdas: Option<Vec<f64>>,
    pub threshold: Option<f64>,
}

/// Check kinds, in the spelling of the subcommands.
pub const CHECK_KINDS: &[&str] = &[
    "check-paraconvex",
    "falsify",
    "scalarize",
    "fact2",
    "approx-convex",
    "bounded",
    "lipschitz",
    "trace",
    "lower-bound",
    "derivative",
    "upper-bound",
    "sublinear",
    "gateaux",
    "gateaux-scan",
    "frechet",
    "modulus",
];

/// Kinds that draw random samples and therefore need an explicit seed.
pub const SEEDED_KINDS: &[&str] = &[
    "check-paraconvex",
    "falsify",
    "scalarize",
    "fact2",
    "approx-convex",
    "bounded",
    "lipschitz",
    "gateaux",
    "gateaux-scan",
    "frechet",
];

/// Kinds whose sample count is the `budget`.
pub const BUDGETED_KINDS: &[&str] =
    &["check-paraconvex", "falsify", "scalarize", "fact2", "approx-convex", "bounded", "lipschitz", "gateaux-scan"];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub config: CheckConfig,
    pub line: Option<usize>,
}

/// A validated configuration.
pub struct Experiment {
    pub name: String,
    /// SHA-256 of the configuration bytes, hex encoded.
    pub hash: String,
    pub output_dir: Option<PathBuf>,
    pub mapping: VectorMapping,
    pub spec: ParaSpec,
    pub cones: HashMap<String, Arc<PolyCone>>,
    pub checks: Vec<Check>,
    source: String,
}

impl fmt::Debug for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Experiment").field("name", &self.name).field("checks", &self.checks.len()).finish()
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Experiment, ConfigError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        let mut exp = Experiment::parse(&source)?;
        if let Some(dir) = &exp.output_dir {
            if dir.is_relative() {
                exp.output_dir = Some(path.parent().unwrap_or(Path::new(".")).join(dir));
            }
        }
        Ok(exp)
    }

    pub fn parse(source: &str) -> Result<Experiment, ConfigError> {
        let raw: RawConfig = toml::from_str(source).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().to_string(),
        })?;
        let at = |span: std::ops::Range<usize>| Some(line_of(source, span.start));
        let fail = |line: Option<usize>, message: String| ConfigError { line, message };

        let mut cones = HashMap::new();
        for c in &raw.cones {
            let line = at(c.span());
            let cone = resolve_cone(c.get_ref()).map_err(|e| fail(line, format!("cone `{}`: {e}", c.get_ref().name)))?;
            if cones.insert(c.get_ref().name.clone(), Arc::new(cone)).is_some() {
                return Err(fail(line, format!("duplicate cone `{}`", c.get_ref().name)));
            }
        }

        let mline = at(raw.mapping.span());
        let mapping = resolve_mapping(raw.mapping.get_ref()).map_err(|e| fail(mline, format!("mapping: {e}")))?;

        let spec = match &raw.spec {
            None => mapping
                .claimed()
                .cloned()
                .ok_or_else(|| fail(mline, "mapping has no claimed constants; add a [spec] section".into()))?,
            Some(s) => {
                let line = at(s.span());
                let sc = s.get_ref();
                let cone = cones.get(&sc.cone).ok_or_else(|| fail(line, format!("spec refers to unknown cone `{}`", sc.cone)))?;
                if sc.k.len() != cone.dim() {
                    return Err(fail(line, format!("k has dimension {} but cone `{}` has dimension {}", sc.k.len(), sc.cone, cone.dim())));
                }
                if cone.dim() != mapping.codomain_dim() {
                    return Err(fail(
                        line,
                        format!("cone `{}` has dimension {} but the mapping has {} components", sc.cone, cone.dim(), mapping.codomain_dim()),
                    ));
                }
                let m = raw.modulus.as_ref().ok_or_else(|| fail(line, "[spec] needs a [modulus] section".into()))?;
                let modulus = resolve_modulus(m.get_ref()).map_err(|e| fail(at(m.span()), format!("modulus: {e}")))?;
                let k = Point::new(sc.k.clone()).map_err(|e| fail(line, e.to_string()))?;
                let built = match (sc.c, sc.c1) {
                    (Some(c), Some(c1)) => ParaSpec::new(modulus, c, c1, k, cone.clone()),
                    (Some(c), None) => ParaSpec::min_form(modulus, c, k, cone.clone()),
                    (None, Some(c1)) => ParaSpec::lambda_form(modulus, c1, k, cone.clone()),
                    (None, None) => return Err(fail(line, "spec needs c, c1 or both".into())),
                };
                built.map_err(|e| fail(line, e.to_string()))?
            }
        };

        let mut checks = Vec::with_capacity(raw.checks.len());
        for (i, c) in raw.checks.iter().enumerate() {
            let line = at(c.span());
            let cfg = c.get_ref().clone();
            if !CHECK_KINDS.contains(&cfg.kind.as_str()) {
                return Err(fail(line, format!("unknown check kind `{}`", cfg.kind)));
            }
            let name = cfg.name.clone().unwrap_or_else(|| format!("{}-{}", i + 1, cfg.kind));
            if checks.iter().any(|c: &Check| c.name == name) {
                return Err(fail(line, format!("duplicate check name `{name}`")));
            }
            checks.push(Check { name, config: cfg, line });
        }

        Ok(Experiment {
            name: raw.name.unwrap_or_else(|| "experiment".into()),
            hash: crate::manifest::sha256_hex(source.as_bytes()),
            output_dir: raw.output.map(|o| o.dir),
            mapping,
            spec,
            cones,
            checks,
            source: source.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// 1-based line of a byte offset.
pub fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn points(rows: &[Vec<f64>]) -> paracone::Result<Vec<Point>> {
    rows.iter().map(|r| Point::new(r.clone())).collect()
}

fn resolve_cone(c: &ConeConfig) -> paracone::Result<PolyCone> {
    let cone = if c.orthant {
        if c.generators.is_some() || c.dual_generators.is_some() {
            return Err(paracone::Error::InvalidParameter("an orthant takes no generators".into()));
        }
        PolyCone::orthant(c.dim, c.norm)?
    } else {
        match (&c.generators, &c.dual_generators) {
            (Some(g), Some(d)) => PolyCone::from_parts(c.name.clone(), points(g)?, points(d)?, c.norm)?,
            (Some(g), None) => PolyCone::from_generators(c.name.clone(), points(g)?, c.norm)?,
            (None, Some(d)) => PolyCone::from_dual(c.name.clone(), points(d)?, c.norm)?,
            (None, None) => return Err(paracone::Error::InvalidParameter("give orthant = true, generators or dual_generators".into())),
        }
    };
    if cone.dim() != c.dim {
        return Err(paracone::Error::DimensionMismatch { expected: c.dim, got: cone.dim() });
    }
    Ok(cone.with_name(c.name.clone()))
}

fn resolve_modulus(m: &ModulusConfig) -> paracone::Result<Modulus> {
    let need = |what: &str| paracone::Error::InvalidModulus(format!("kind `{}` needs `{what}`", m.kind));
    match m.kind.as_str() {
        "zero" => Ok(Modulus::zero()),
        "square" => Ok(Modulus::square(m.scale)),
        "power" => Modulus::power(m.p.ok_or_else(|| need("p"))?, m.scale),
        "table" => Modulus::table(m.knots.clone().ok_or_else(|| need("knots"))?, m.scale),
        other => Err(paracone::Error::InvalidModulus(format!("unknown kind `{other}`"))),
    }
}

fn resolve_mapping(m: &MappingConfig) -> paracone::Result<VectorMapping> {
    match m {
        MappingConfig::Affine { domain, a, b } => make_affine(a.clone(), b.clone(), domain.resolve()?),
        MappingConfig::Quadratic { domain, q, b, c, k } => {
            make_quadratic(q.clone(), b.clone(), c.clone(), Point::new(k.clone())?, domain.resolve()?)
        }
        MappingConfig::Semiconvex { domain, u1, u2, c } => {
            make_semiconvex_scalar(u1.resolve()?, SmoothPart(u2.clone()), *c, domain.resolve()?)
        }
        MappingConfig::Piecewise { domain, u } => make_piecewise_scalar(u.resolve()?, domain.resolve()?),
        MappingConfig::Example1 { domain, k, c, components } => make_example1(Example1Config {
            n: components.len(),
            k: Point::new(k.clone())?,
            u1: components.iter().map(|c| c.u1.resolve()).collect::<paracone::Result<_>>()?,
            u2: components.iter().map(|c| SmoothPart(c.u2.clone())).collect(),
            c: *c,
            domain: domain.resolve()?,
        }),
    }
}

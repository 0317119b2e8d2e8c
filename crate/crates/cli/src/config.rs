//! Run configuration: one TOML file, schema-versioned, unknown keys rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use kglab_core::fock::{ProbeVerdict, DEFAULT_DIMENSION_CAP};
use kglab_core::kernel::{KernelConfig, KgSide, Tolerances};
use kglab_core::minkowski::{BallRegion, LorentzMatrix};
use kglab_core::polynomial::{EvenPolynomial, Polynomial};
use kglab_core::psqrt::{SamplerConfig, SqrtCase};
use kglab_core::quadrature::RuleKind;
use kglab_core::testfn::{BumpFunction, GaussianPacket, DEFAULT_RESOLUTION};
use kglab_core::{SpacetimePoint, TestFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toml::Spanned;

pub const SCHEMA_VERSION: u32 = 1;

/// A monomial term written as `[[e0, e1, ...], re, im]`.
pub type Term = (Vec<u32>, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.file, l, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Not embedded in reports: it does not affect any number.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Spanned<KernelBlock>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_functions: Vec<Spanned<TestFunctionSpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub polynomials: Vec<Spanned<PolynomialSpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<Spanned<PairSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<Spanned<VerifyBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sqrt: Option<Spanned<SqrtBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<Spanned<FockBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure1: Option<Spanned<Figure1Block>>,
}

fn default_nodes() -> usize {
    KernelConfig::new(4, 0.0).nodes_per_axis
}

fn default_cutoff() -> f64 {
    KernelConfig::new(4, 0.0).cutoff
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub dimension: usize,
    pub mass: f64,
    #[serde(default = "default_nodes")]
    pub nodes_per_axis: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default)]
    pub rule: RuleKind,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl KernelBlock {
    pub fn to_config(&self) -> KernelConfig {
        KernelConfig {
            dim: self.dimension,
            mass: self.mass,
            nodes_per_axis: self.nodes_per_axis,
            cutoff: self.cutoff,
            rule: self.rule,
            tolerances: self.tolerances,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    Gaussian,
    Bump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    pub name: String,
    pub kind: FunctionKind,
    pub center: Vec<f64>,
    /// Isotropic Gaussian width; alternative to `widths`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub name: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub f: String,
    pub g: String,
    pub kernel: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Locality,
    Antisymmetry,
    Kg,
    Translation,
    Covariance,
    OddControl,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Locality,
        Suite::Antisymmetry,
        Suite::Kg,
        Suite::Translation,
        Suite::Covariance,
        Suite::OddControl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Locality => "locality",
            Suite::Antisymmetry => "antisymmetry",
            Suite::Kg => "kg",
            Suite::Translation => "translation",
            Suite::Covariance => "covariance",
            Suite::OddControl => "odd-control",
        }
    }
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub locality: Vec<Spanned<PairSpec>>,
    #[serde(default)]
    pub antisymmetry: Vec<Spanned<PairSpec>>,
    #[serde(default)]
    pub kg: Vec<Spanned<KgSpec>>,
    #[serde(default)]
    pub translation: Vec<Spanned<TranslationSpec>>,
    #[serde(default)]
    pub covariance: Vec<Spanned<CovarianceSpec>>,
    #[serde(default)]
    pub odd_control: Vec<Spanned<OddControlSpec>>,
}

fn side_f() -> KgSide {
    KgSide::F
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgSpec {
    pub f: String,
    pub g: String,
    pub kernel: String,
    #[serde(default = "side_f")]
    pub side: KgSide,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationSpec {
    pub f: String,
    pub g: String,
    pub kernel: String,
    pub shift: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransformSpec {
    Boost { axis: usize, rapidity: f64 },
    Rotation { axes: [usize; 2], angle: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSpec {
    pub f: String,
    pub g: String,
    pub kernel: String,
    /// Composed left to right.
    pub transforms: Vec<TransformSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddControlSpec {
    pub f: String,
    pub g: String,
    pub polynomial: String,
}

fn default_samples() -> usize {
    SamplerConfig::default().count
}
fn default_half_width() -> f64 {
    SamplerConfig::default().half_width
}
fn default_eps_im() -> f64 {
    SamplerConfig::default().eps_im
}
fn default_eps_table() -> Vec<f64> {
    SamplerConfig::default().eps_table
}
fn default_max_disc() -> usize {
    SamplerConfig::default().max_discontinuities
}
fn default_bisection() -> f64 {
    SamplerConfig::default().resolution
}
fn default_square_points() -> usize {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqrtBlock {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_eps_im")]
    pub eps_im: f64,
    #[serde(default = "default_eps_table")]
    pub eps_table: Vec<f64>,
    #[serde(default = "default_max_disc")]
    pub max_discontinuities: usize,
    #[serde(default = "default_bisection")]
    pub bisection_resolution: f64,
    #[serde(default = "default_square_points")]
    pub square_check_points: usize,
    pub fields: Vec<Spanned<SqrtEntry>>,
}

impl SqrtBlock {
    pub fn sampler(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            count: self.samples,
            half_width: self.half_width,
            seed,
            eps_im: self.eps_im,
            eps_table: self.eps_table.clone(),
            max_discontinuities: self.max_discontinuities,
            resolution: self.bisection_resolution,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqrtEntry {
    pub polynomial: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<SqrtCase>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub points_per_axis: usize,
    pub spacing: f64,
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockBlock {
    pub n_tot: usize,
    #[serde(default = "default_cap")]
    pub dimension_cap: usize,
    pub lattice: LatticeSpec,
    /// Locality tolerance of the probes; defaults to the kernel's `local` tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub commutators: Vec<Spanned<CommutatorSpec>>,
    #[serde(default)]
    pub probes: Vec<Spanned<ProbeSpec>>,
}

/// Multipliers are named polynomials A; the field uses B = √A.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorSpec {
    pub multiplier: String,
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub multiplier: String,
    pub f: String,
    pub g: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<ProbeVerdict>,
}

fn default_segment_count() -> usize {
    8
}
fn default_segment_length() -> f64 {
    1.0
}
fn default_attempts() -> usize {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Block {
    pub x: Vec<f64>,
    pub t_range: [f64; 2],
    pub x_range: [f64; 2],
    /// Cell counts along t and x¹.
    pub cells: [usize; 2],
    #[serde(default = "default_segment_count")]
    pub segments: usize,
    #[serde(default = "default_segment_length")]
    pub segment_length: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

/// Parsed config plus the objects built from it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub functions: BTreeMap<String, TestFunction>,
    pub polynomials: BTreeMap<String, Polynomial>,
    file: String,
    source: String,
}

impl Loaded {
    pub fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.file.clone(),
            line: span.map(|s| line_of(&self.source, s.start)),
            message: message.into(),
        }
    }

    pub fn kernel(&self) -> Result<KernelConfig, ConfigError> {
        self.config
            .kernel
            .as_ref()
            .map(|k| k.get_ref().to_config())
            .ok_or_else(|| self.error(None, "missing [kernel] table"))
    }

    pub fn function(&self, name: &str, span: Range<usize>) -> Result<&TestFunction, ConfigError> {
        self.functions
            .get(name)
            .ok_or_else(|| self.error(Some(span), format!("unknown test function `{name}`")))
    }

    pub fn polynomial(&self, name: &str, span: Range<usize>) -> Result<&Polynomial, ConfigError> {
        self.polynomials
            .get(name)
            .ok_or_else(|| self.error(Some(span), format!("unknown polynomial `{name}`")))
    }

    /// A named polynomial in the kernel dimension that must be even.
    pub fn even(&self, name: &str, span: Range<usize>) -> Result<EvenPolynomial, ConfigError> {
        let p = self.polynomial(name, span.clone())?;
        self.check_dim(p.dim(), &format!("polynomial `{name}`"), span.clone())?;
        EvenPolynomial::new(p.clone())
            .map_err(|e| self.error(Some(span), format!("polynomial `{name}`: {e}")))
    }

    pub fn check_dim(&self, dim: usize, what: &str, span: Range<usize>) -> Result<(), ConfigError> {
        let expected = self.kernel()?.dim;
        if dim != expected {
            return Err(self.error(
                Some(span),
                format!("{what} has dimension {dim}, kernel dimension is {expected}"),
            ));
        }
        Ok(())
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn is_valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn build_polynomial(terms: &[Term]) -> Result<Polynomial, String> {
    let dim = terms.first().map(|t| t.0.len()).ok_or("polynomial needs at least one term")?;
    Polynomial::from_terms(dim, terms.iter().map(|(e, re, im)| (e.clone(), Complex64::new(*re, *im))))
        .map_err(|e| e.to_string())
}

fn build_function(spec: &TestFunctionSpec) -> Result<TestFunction, String> {
    let center = SpacetimePoint::new(spec.center.clone()).map_err(|e| e.to_string())?;
    match spec.kind {
        FunctionKind::Gaussian => {
            if spec.radius.is_some() || spec.resolution.is_some() {
                return Err("`radius` and `resolution` only apply to bumps".into());
            }
            let widths = match (&spec.width, &spec.widths) {
                (Some(w), None) => vec![*w; center.dim()],
                (None, Some(ws)) => ws.clone(),
                _ => return Err("a gaussian needs exactly one of `width` or `widths`".into()),
            };
            let mut g = GaussianPacket::new(center, &widths).map_err(|e| e.to_string())?;
            if let Some(t) = &spec.tilt {
                g = g.with_tilt(t.clone()).map_err(|e| e.to_string())?;
            }
            if let Some(terms) = &spec.prefactor {
                let p = build_polynomial(terms)?;
                g = g.with_prefactor(p).map_err(|e| e.to_string())?;
            }
            Ok(TestFunction::Gaussian(g))
        }
        FunctionKind::Bump => {
            if spec.width.is_some() || spec.widths.is_some() || spec.tilt.is_some() || spec.prefactor.is_some() {
                return Err("`width`, `widths`, `tilt` and `prefactor` only apply to gaussians".into());
            }
            let radius = spec.radius.ok_or("a bump needs `radius`")?;
            let ball = BallRegion::new(center, radius).map_err(|e| e.to_string())?;
            let resolution = spec.resolution.unwrap_or(DEFAULT_RESOLUTION);
            BumpFunction::with_resolution(ball, resolution)
                .map(TestFunction::Bump)
                .map_err(|e| e.to_string())
        }
    }
}

/// Lorentz matrix of a composed transform list.
pub fn lorentz(dim: usize, transforms: &[TransformSpec]) -> Result<LorentzMatrix, String> {
    let mut m = LorentzMatrix::identity(dim);
    for t in transforms {
        let next = match *t {
            TransformSpec::Boost { axis, rapidity } => LorentzMatrix::boost(dim, axis, rapidity),
            TransformSpec::Rotation { axes: [i, j], angle } => LorentzMatrix::rotation(dim, i, j, angle),
        }
        .map_err(|e| e.to_string())?;
        m = m.compose(&next);
    }
    Ok(m)
}

/// Parses, resolves defaults and validates everything that can be checked
/// without running a computation.
pub fn parse(source: &str, file: &str) -> Result<Loaded, ConfigError> {
    let mut config: RunConfig = toml::from_str(source).map_err(|e| ConfigError {
        file: file.to_string(),
        line: e.span().map(|s| line_of(source, s.start)),
        message: e.message().trim().to_string(),
    })?;
    for f in config.test_functions.iter_mut() {
        let f = f.get_mut();
        if f.kind == FunctionKind::Bump && f.resolution.is_none() {
            f.resolution = Some(DEFAULT_RESOLUTION);
        }
    }
    let mut loaded = Loaded {
        config,
        functions: BTreeMap::new(),
        polynomials: BTreeMap::new(),
        file: file.to_string(),
        source: source.to_string(),
    };
    if loaded.config.schema_version != SCHEMA_VERSION {
        return Err(loaded.error(
            None,
            format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                loaded.config.schema_version
            ),
        ));
    }
    if let Some(k) = &loaded.config.kernel {
        k.get_ref()
            .to_config()
            .validate()
            .map_err(|e| loaded.error(Some(k.span()), format!("[kernel]: {e}")))?;
    }
    let mut functions = BTreeMap::new();
    for spec in &loaded.config.test_functions {
        let s = spec.get_ref();
        if !is_valid_name(&s.name) {
            return Err(loaded.error(Some(spec.span()), format!("invalid name `{}`", s.name)));
        }
        let f = build_function(s)
            .map_err(|e| loaded.error(Some(spec.span()), format!("test function `{}`: {e}", s.name)))?;
        if let Some(k) = &loaded.config.kernel {
            if f.dim() != k.get_ref().dimension {
                return Err(loaded.error(
                    Some(spec.span()),
                    format!(
                        "test function `{}` has dimension {}, kernel dimension is {}",
                        s.name,
                        f.dim(),
                        k.get_ref().dimension
                    ),
                ));
            }
        }
        if functions.insert(s.name.clone(), f).is_some() {
            return Err(loaded.error(Some(spec.span()), format!("duplicate test function `{}`", s.name)));
        }
    }
    let mut polynomials = BTreeMap::new();
    for spec in &loaded.config.polynomials {
        let s = spec.get_ref();
        if !is_valid_name(&s.name) {
            return Err(loaded.error(Some(spec.span()), format!("invalid name `{}`", s.name)));
        }
        let p = build_polynomial(&s.terms)
            .map_err(|e| loaded.error(Some(spec.span()), format!("polynomial `{}`: {e}", s.name)))?;
        if polynomials.insert(s.name.clone(), p).is_some() {
            return Err(loaded.error(Some(spec.span()), format!("duplicate polynomial `{}`", s.name)));
        }
    }
    loaded.functions = functions;
    loaded.polynomials = polynomials;
    if let Some(sq) = &loaded.config.sqrt {
        sq.get_ref()
            .sampler(0)
            .validate()
            .map_err(|e| loaded.error(Some(sq.span()), format!("[sqrt]: {e}")))?;
    }
    Ok(loaded)
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let file = path.display().to_string();
    let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: file.clone(),
        line: None,
        message: format!("cannot read config: {e}"),
    })?;
    parse(&source, &file)
}

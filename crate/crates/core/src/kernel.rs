//! The smeared commutator pairing Δ_A(f, g) and its verification checks.
//!
//! With the mass-shell delta integrated out,
//!
//! ```text
//! Δ_A(f,g) = ∫ d^{d−1}p / 2ω [ A(ω,p) f̃(ω,p) g̃(−ω,−p) − A(−ω,p) f̃(−ω,p) g̃(ω,−p) ]
//! ```
//!
//! with ω = √(|p|² + m²). The bracket is the odd part in ω of
//! A(ω,p) f̃(ω,p) g̃(−ω,−p), so the integrand stays smooth at p = 0 even for
//! m = 0.

use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{regions_spacelike_separated, LorentzMatrix, SpacetimePoint};
use crate::polynomial::{EvenPolynomial, Polynomial};
use crate::quadrature::{MomentumRule, NodeSet, RuleKind};
use crate::testfn::{FourierConvention, TestFunction, CONVENTION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub local: f64,
    pub antisym: f64,
    /// KG residual bound for closed-form (Gaussian) test functions.
    pub kg: f64,
    /// KG residual bound for grid-transformed (bump) test functions.
    pub kg_compact: f64,
    pub covariance: f64,
    pub translation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            local: 1e-6,
            antisym: 1e-10,
            kg: 1e-8,
            kg_compact: 1e-6,
            covariance: 1e-6,
            translation: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("local", self.local),
            ("antisym", self.antisym),
            ("kg", self.kg),
            ("kg_compact", self.kg_compact),
            ("covariance", self.covariance),
            ("translation", self.translation),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("tolerance {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub dim: usize,
    pub mass: f64,
    pub nodes_per_axis: usize,
    pub cutoff: f64,
    pub rule: RuleKind,
    pub tolerances: Tolerances,
}

/// Largest spacetime dimension handled by the shell sum.
pub const MAX_SHELL_DIM: usize = 16;

/// Relative part of the convergence criterion on the N/2 → N difference.
pub const CONVERGENCE_RELATIVE: f64 = 1e-3;
/// Absolute part, in units of the pairing scale ‖f̃‖·‖g̃‖.
pub const CONVERGENCE_ABSOLUTE: f64 = 1e-12;

impl KernelConfig {
    pub fn new(dim: usize, mass: f64) -> Self {
        Self {
            dim,
            mass,
            nodes_per_axis: 128,
            cutoff: 10.0,
            rule: RuleKind::TensorGaussLegendre,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_quadrature(mut self, nodes_per_axis: usize, cutoff: f64) -> Self {
        self.nodes_per_axis = nodes_per_axis;
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {}", self.dim)));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be >= 0, got {}", self.mass)));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be > 0, got {}", self.cutoff)));
        }
        if self.nodes_per_axis < 8 {
            return Err(Error::InvalidInput(format!(
                "nodes per axis must be >= 8, got {}",
                self.nodes_per_axis
            )));
        }
        self.tolerances.validate()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.dim == 2 && self.mass == 0.0 {
            w.push(
                "d = 2 with m = 0: massless two-dimensional fields fall outside the causal \
                 centrality argument; results are reported but not covered by it"
                    .to_string(),
            );
        }
        w
    }

    pub fn rule(&self) -> MomentumRule {
        match self.rule {
            RuleKind::TensorGaussLegendre => {
                MomentumRule::tensor(self.dim - 1, self.nodes_per_axis, self.cutoff)
            }
        }
    }

    pub fn half_rule(&self) -> MomentumRule {
        match self.rule {
            RuleKind::TensorGaussLegendre => {
                MomentumRule::tensor(self.dim - 1, self.nodes_per_axis / 2, self.cutoff)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingResult {
    pub value: Complex64,
    /// |Q_N − Q_{N/2}|.
    pub error_estimate: f64,
    pub converged: bool,
    /// ‖f̃‖·‖g̃‖ in the shell measure d^{d−1}p/2ω over both sheets.
    pub scale: f64,
    pub convention: FourierConvention,
}

#[derive(Debug, Clone, Copy, Default)]
struct ShellAccumulator {
    value: Complex64,
    norm_f: f64,
    norm_g: f64,
}

impl Add for ShellAccumulator {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            norm_f: self.norm_f + o.norm_f,
            norm_g: self.norm_g + o.norm_g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSum {
    pub value: Complex64,
    pub scale: f64,
}

fn max_shell_norm(rule: &MomentumRule, mass: f64) -> f64 {
    match rule {
        MomentumRule::Tensor { dim, nodes, .. } => {
            let pmax = nodes.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let p2 = *dim as f64 * pmax * pmax;
            (2.0 * p2 + mass * mass).sqrt()
        }
        MomentumRule::Nodes(set) => (0..set.len())
            .map(|i| {
                let p2: f64 = set.point(i).iter().map(|v| v * v).sum();
                (2.0 * p2 + mass * mass).sqrt()
            })
            .fold(0.0, f64::max),
    }
}

/// Mass-shell reduced sum for an arbitrary (not necessarily even) kernel
/// polynomial on the given rule.
pub fn shell_sum(
    kernel: &Polynomial,
    f: &TestFunction,
    g: &TestFunction,
    mass: f64,
    rule: &MomentumRule,
) -> Result<ShellSum> {
    let d = rule.dim() + 1;
    for n in [kernel.dim(), f.dim(), g.dim()] {
        if n != d {
            return Err(Error::DimensionMismatch { expected: d, actual: n });
        }
    }
    if d > MAX_SHELL_DIM {
        return Err(Error::InvalidInput(format!("dimension {d} exceeds {MAX_SHELL_DIM}")));
    }
    let reach = max_shell_norm(rule, mass);
    for h in [f, g] {
        let nyq = h.band_limit();
        if reach > nyq * (1.0 + 1e-12) {
            return Err(Error::OutOfBand { norm: reach, nyquist: nyq });
        }
    }
    let acc: ShellAccumulator = rule.integrate(|p, w| {
        let p2: f64 = p.iter().map(|v| v * v).sum();
        let omega = (p2 + mass * mass).sqrt();
        if omega == 0.0 {
            return ShellAccumulator::default();
        }
        let mut up = [0.0f64; MAX_SHELL_DIM];
        let mut down = [0.0f64; MAX_SHELL_DIM];
        up[0] = omega;
        down[0] = -omega;
        for i in 0..p.len() {
            up[i + 1] = p[i];
            down[i + 1] = -p[i];
        }
        // down is (−ω, −p); the lower-sheet kernel point is (−ω, p).
        let (up, down) = (&up[..d], &down[..d]);
        let (f_up, f_down) = f.fourier_sheets(up).expect("band checked");
        let (g_up, g_down) = g.fourier_sheets(down).expect("band checked");
        let mut lower = [0.0f64; MAX_SHELL_DIM];
        lower[..d].copy_from_slice(up);
        lower[0] = -omega;
        let lower = &lower[..d];
        let m = w / (2.0 * omega);
        let term = kernel.eval(up) * f_up * g_up - kernel.eval(lower) * f_down * g_down;
        ShellAccumulator {
            value: term * m,
            norm_f: m * (f_up.norm_sqr() + f_down.norm_sqr()),
            norm_g: m * (g_up.norm_sqr() + g_down.norm_sqr()),
        }
    });
    Ok(ShellSum {
        value: acc.value,
        scale: (acc.norm_f * acc.norm_g).sqrt(),
    })
}

fn check_config(cfg: &KernelConfig, kernel: &Polynomial) -> Result<()> {
    cfg.validate()?;
    if kernel.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            actual: kernel.dim(),
        });
    }
    Ok(())
}

/// Pairing with an arbitrary kernel polynomial, with the N/2-grid error estimate.
pub fn pairing(
    kernel: &Polynomial,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
) -> Result<PairingResult> {
    check_config(cfg, kernel)?;
    let full = shell_sum(kernel, f, g, cfg.mass, &cfg.rule())?;
    let half = shell_sum(kernel, f, g, cfg.mass, &cfg.half_rule())?;
    let error_estimate = (full.value - half.value).norm();
    let converged = error_estimate
        <= CONVERGENCE_RELATIVE * full.value.norm() + CONVERGENCE_ABSOLUTE * full.scale;
    Ok(PairingResult {
        value: full.value,
        error_estimate,
        converged,
        scale: full.scale,
        convention: CONVENTION,
    })
}

/// Δ_A(f, g).
pub fn pair(
    a: &EvenPolynomial,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
) -> Result<PairingResult> {
    pairing(a, f, g, cfg)
}

/// Δ_A(f, g) on an explicit node set (for example a Fock mode lattice).
pub fn pair_on_nodes(
    a: &EvenPolynomial,
    f: &TestFunction,
    g: &TestFunction,
    mass: f64,
    nodes: &NodeSet,
) -> Result<ShellSum> {
    shell_sum(a, f, g, mass, &MomentumRule::Nodes(nodes.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KgSide {
    F,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KgResidual {
    pub residual: f64,
    pub resolution_adequate: bool,
}

/// |Δ_A(Kf, g)| / (|Δ_A(f, g)| + floor), with K applied on the chosen side.
pub fn pair_kg_residual(
    a: &EvenPolynomial,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
    side: KgSide,
) -> Result<KgResidual> {
    check_config(cfg, a)?;
    let rule = cfg.rule();
    let base = shell_sum(a, f, g, cfg.mass, &rule)?;
    let (image, ok) = match side {
        KgSide::F => {
            let kf = f.apply_klein_gordon(cfg.mass)?;
            (shell_sum(a, &kf.function, g, cfg.mass, &rule)?, kf.resolution_adequate)
        }
        KgSide::G => {
            let kg = g.apply_klein_gordon(cfg.mass)?;
            (shell_sum(a, f, &kg.function, cfg.mass, &rule)?, kg.resolution_adequate)
        }
    };
    let floor = CONVERGENCE_ABSOLUTE * base.scale + f64::MIN_POSITIVE;
    Ok(KgResidual {
        residual: image.value.norm() / (base.value.norm() + floor),
        resolution_adequate: ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Advisory,
    /// No locality claim: supports not certified spacelike.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityReport {
    pub separated: bool,
    pub value: Complex64,
    pub magnitude: f64,
    pub error_estimate: f64,
    pub scale: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Einstein-causality check of Δ_A for certified spacelike supports.
pub fn locality_report(
    a: &EvenPolynomial,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
) -> Result<LocalityReport> {
    let r = pair(a, f, g, cfg)?;
    let threshold = cfg.tolerances.local * r.scale;
    let magnitude = r.value.norm();
    let (separated, verdict) = match (f.support(), g.support()) {
        (Some(sf), Some(sg)) => {
            let sep = regions_spacelike_separated(sf, sg)?;
            let verdict = if !sep {
                Verdict::NotApplicable
            } else if magnitude + r.error_estimate <= threshold {
                Verdict::Pass
            } else if magnitude - r.error_estimate > threshold {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            };
            (sep, verdict)
        }
        _ => (false, Verdict::Advisory),
    };
    Ok(LocalityReport {
        separated,
        value: r.value,
        magnitude,
        error_estimate: r.error_estimate,
        scale: r.scale,
        threshold,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub deviation: f64,
    pub converged: bool,
}

fn relative_gap(a: Complex64, b: Complex64, scale: f64) -> f64 {
    let denom = a.norm().max(b.norm()).max(CONVERGENCE_ABSOLUTE * scale);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).norm() / denom
    }
}

/// Compares Δ_A(f∘Λ⁻¹, g∘Λ⁻¹) with Δ_{A∘Λ}(f, g).
pub fn covariance_check(
    a: &EvenPolynomial,
    lambda: &LorentzMatrix,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
) -> Result<CovarianceReport> {
    let lhs = pair(a, &f.lorentz_transform(lambda)?, &g.lorentz_transform(lambda)?, cfg)?;
    let rotated = a.compose_linear(lambda.matrix())?;
    let rhs = pair(&rotated, f, g, cfg)?;
    Ok(CovarianceReport {
        lhs: lhs.value,
        rhs: rhs.value,
        deviation: relative_gap(lhs.value, rhs.value, lhs.scale.max(rhs.scale)),
        converged: lhs.converged && rhs.converged,
    })
}

/// Relative change of Δ_A under a simultaneous translation of both arguments.
pub fn translation_check(
    a: &EvenPolynomial,
    shift: &SpacetimePoint,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
) -> Result<f64> {
    check_config(cfg, a)?;
    let rule = cfg.rule();
    let base = shell_sum(a, f, g, cfg.mass, &rule)?;
    let moved = shell_sum(a, &f.translate(shift)?, &g.translate(shift)?, cfg.mass, &rule)?;
    Ok(relative_gap(base.value, moved.value, base.scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OddControlReport {
    /// |pairing(f,g) + pairing(g,f)|.
    pub symmetric_part: f64,
    /// |pairing(f,g) − pairing(g,f)|.
    pub antisymmetric_part: f64,
    pub scale: f64,
}

/// Negative control: an odd kernel yields a symmetric, not antisymmetric, form.
pub fn odd_control(
    p: &Polynomial,
    f: &TestFunction,
    g: &TestFunction,
    cfg: &KernelConfig,
) -> Result<OddControlReport> {
    check_config(cfg, p)?;
    if !p.is_odd() {
        return Err(Error::InvalidInput(
            "odd control requires a polynomial with only odd-degree monomials".into(),
        ));
    }
    let rule = cfg.rule();
    let fg = shell_sum(p, f, g, cfg.mass, &rule)?;
    let gf = shell_sum(p, g, f, cfg.mass, &rule)?;
    Ok(OddControlReport {
        symmetric_part: (fg.value + gf.value).norm(),
        antisymmetric_part: (fg.value - gf.value).norm(),
        scale: fg.scale,
    })
}

use kglab_core::fock::{
    build_multiplier_field, commutator_cnumber, faithfulness, mode_sum, relative_locality_probe, standard_constant,
    CommutatorReport, Faithfulness, ModeLattice, ProbeReport, ProbeVerdict, TruncatedFock,
};
use kglab_core::kernel::pair_on_nodes;
use kglab_core::psqrt::{sqrt_field, MultiplierField};
use kglab_core::{EvenPolynomial, TestFunction};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{write_report, Plan, Planned};
use crate::config::{LatticeSpec, Loaded};
use crate::report::{header, num, Output, Status};
use crate::RunError;

/// Bound on max |[X, Y] − λ·1| relative to |λ| plus the cancellation floor.
pub const DEVIATION_TOL: f64 = 1e-12;
/// Relative agreement of λ with the mode sum and with the kernel on the lattice nodes.
pub const AGREEMENT_TOL: f64 = 1e-10;

struct Commutator {
    multiplier: String,
    f_name: String,
    g_name: String,
    field: MultiplierField,
    kernel: EvenPolynomial,
    f: TestFunction,
    g: TestFunction,
}

struct Probe {
    multiplier: String,
    f_name: String,
    g_name: String,
    field: MultiplierField,
    f: TestFunction,
    g: TestFunction,
    fock: TruncatedFock,
    expect: Option<ProbeVerdict>,
}

struct FockPlan {
    dim: usize,
    fock: TruncatedFock,
    tolerance: f64,
    commutators: Vec<Commutator>,
    probes: Vec<Probe>,
}

#[derive(Debug, Serialize)]
struct LatticeInfo {
    dimension: usize,
    mass: f64,
    points_per_axis: usize,
    spacing: f64,
    modes: usize,
    n_tot: usize,
    fock_dimension: u128,
    safe_dimension: u128,
}

impl LatticeInfo {
    fn of(fock: &TruncatedFock) -> Self {
        let l = fock.lattice();
        Self {
            dimension: l.dim(),
            mass: l.mass(),
            points_per_axis: l.points_per_axis(),
            spacing: l.spacing(),
            modes: l.len(),
            n_tot: fock.n_tot(),
            fock_dimension: fock.dimension(),
            safe_dimension: fock.safe_dimension(),
        }
    }
}

#[derive(Debug, Serialize)]
struct CommutatorResult {
    multiplier: String,
    f: String,
    g: String,
    status: Status,
    lambda: Complex64,
    commutator: CommutatorReport,
    mode_sum: Complex64,
    kernel_on_nodes: Complex64,
    mode_sum_agreement: f64,
    kernel_agreement: f64,
    /// λ divided by the 2π-free pairing of the kernel on the lattice nodes.
    implied_a0: Complex64,
    a0_agreement: f64,
    faithfulness: Faithfulness,
}

#[derive(Debug, Serialize)]
struct ProbeResult {
    multiplier: String,
    f: String,
    g: String,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<ProbeVerdict>,
    lambda: Complex64,
    lambda_prime: Complex64,
    lattice: LatticeInfo,
    probe: ProbeReport,
}

#[derive(Debug, Serialize)]
struct FockResults {
    a0: f64,
    lattice: LatticeInfo,
    commutators: Vec<CommutatorResult>,
    probes: Vec<ProbeResult>,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if b.norm() > 0.0 {
        d / b.norm()
    } else {
        d
    }
}

fn build_fock(dim: usize, mass: f64, l: &LatticeSpec, n_tot: usize, cap: usize) -> kglab_core::Result<TruncatedFock> {
    let lattice = ModeLattice::new(dim, mass, l.points_per_axis, l.spacing)?;
    TruncatedFock::new(lattice, n_tot, cap)
}

pub fn plan(loaded: &Loaded) -> Planned {
    let cfg = loaded.kernel()?;
    let block = loaded
        .config
        .fock
        .as_ref()
        .ok_or_else(|| loaded.error(None, "`fock` needs a [fock] table"))?;
    let b = block.get_ref();
    let span = block.span();
    let fock = build_fock(cfg.dim, cfg.mass, &b.lattice, b.n_tot, b.dimension_cap)
        .map_err(|e| loaded.error(Some(span.clone()), format!("[fock]: {e}")))?;
    let tolerance = b.tolerance.unwrap_or(cfg.tolerances.local);
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(loaded.error(Some(span), "[fock] tolerance must be > 0").into());
    }
    let multiplier = |name: &str, span| -> Result<(MultiplierField, EvenPolynomial), RunError> {
        let a = loaded.even(name, span)?;
        Ok((sqrt_field(a.as_polynomial().clone()), a))
    };
    let mut commutators = Vec::new();
    for e in &b.commutators {
        let s = e.get_ref();
        let (field, kernel) = multiplier(&s.multiplier, e.span())?;
        commutators.push(Commutator {
            multiplier: s.multiplier.clone(),
            f_name: s.f.clone(),
            g_name: s.g.clone(),
            field,
            kernel,
            f: loaded.function(&s.f, e.span())?.clone(),
            g: loaded.function(&s.g, e.span())?.clone(),
        });
    }
    let mut probes = Vec::new();
    for e in &b.probes {
        let s = e.get_ref();
        let (field, _) = multiplier(&s.multiplier, e.span())?;
        let f = loaded.function(&s.f, e.span())?.clone();
        let g = loaded.function(&s.g, e.span())?.clone();
        if !(f.is_compact() && g.is_compact()) {
            return Err(loaded
                .error(Some(e.span()), "relative-locality probes need compactly supported test functions")
                .into());
        }
        let lattice = s.lattice.unwrap_or(b.lattice);
        let pf = build_fock(cfg.dim, cfg.mass, &lattice, s.n_tot.unwrap_or(b.n_tot), b.dimension_cap)
            .map_err(|err| loaded.error(Some(e.span()), format!("probe: {err}")))?;
        probes.push(Probe {
            multiplier: s.multiplier.clone(),
            f_name: s.f.clone(),
            g_name: s.g.clone(),
            field,
            f,
            g,
            fock: pf,
            expect: s.expect,
        });
    }
    Ok(Box::new(FockPlan {
        dim: cfg.dim,
        fock,
        tolerance,
        commutators,
        probes,
    }))
}

fn run_commutator(c: &Commutator, fock: &TruncatedFock) -> kglab_core::Result<CommutatorResult> {
    let lattice = fock.lattice();
    let x = build_multiplier_field(&c.field, &c.f, fock)?;
    let y = build_multiplier_field(&c.field, &c.g, fock)?;
    let r = commutator_cnumber(&x, &y, fock)?;
    let ms = mode_sum(
        |p| {
            let b = c.field.eval(p);
            b * b
        },
        &c.f,
        &c.g,
        lattice,
    )?;
    let bare = pair_on_nodes(&c.kernel, &c.f, &c.g, lattice.mass(), &lattice.nodes())?.value;
    let a0 = standard_constant(lattice.dim());
    let kernel_on_nodes = bare * a0;
    let implied_a0 = if bare.norm() > 0.0 { r.lambda / bare } else { Complex64::new(f64::NAN, 0.0) };
    let mode_sum_agreement = rel(r.lambda, ms);
    let kernel_agreement = rel(r.lambda, kernel_on_nodes);
    let a0_agreement = rel(implied_a0, Complex64::new(a0, 0.0));
    let ok = r.deviation <= DEVIATION_TOL
        && mode_sum_agreement <= AGREEMENT_TOL
        && kernel_agreement <= AGREEMENT_TOL
        && a0_agreement <= AGREEMENT_TOL;
    Ok(CommutatorResult {
        multiplier: c.multiplier.clone(),
        f: c.f_name.clone(),
        g: c.g_name.clone(),
        status: if ok { Status::Pass } else { Status::Fail },
        lambda: r.lambda,
        commutator: r,
        mode_sum: ms,
        kernel_on_nodes,
        mode_sum_agreement,
        kernel_agreement,
        implied_a0,
        a0_agreement,
        faithfulness: faithfulness(&c.field, lattice),
    })
}

fn run_probe(p: &Probe, tolerance: f64) -> kglab_core::Result<ProbeResult> {
    let r = relative_locality_probe(&p.field, &p.f, &p.g, &p.fock, tolerance)?;
    let status = match (r.verdict, p.expect) {
        (ProbeVerdict::NotApplicable, _) => Status::NotApplicable,
        (v, Some(x)) if v != x => Status::Fail,
        (ProbeVerdict::SelfNonlocal, None) => Status::Fail,
        _ => Status::Pass,
    };
    Ok(ProbeResult {
        multiplier: p.multiplier.clone(),
        f: p.f_name.clone(),
        g: p.g_name.clone(),
        status,
        expected: p.expect,
        lambda: r.comm_ff.lambda,
        lambda_prime: r.comm_fg_adj.lambda,
        lattice: LatticeInfo::of(&p.fock),
        probe: r,
    })
}

impl Plan for FockPlan {
    fn run(&self, loaded: &Loaded, out: &Output) -> Result<Status, RunError> {
        let commutators = self
            .commutators
            .par_iter()
            .map(|c| run_commutator(c, &self.fock))
            .collect::<kglab_core::Result<Vec<_>>>()?;
        let probes = self
            .probes
            .par_iter()
            .map(|p| run_probe(p, self.tolerance))
            .collect::<kglab_core::Result<Vec<_>>>()?;
        let status = Status::combine(commutators.iter().map(|c| c.status).chain(probes.iter().map(|p| p.status)));
        let mut warnings = Vec::new();
        for c in &self.commutators {
            for w in build_multiplier_field(&c.field, &c.f, &self.fock)?.warnings {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
        let mut rows = Vec::new();
        for c in &commutators {
            rows.push(vec![
                "commutator".to_string(),
                c.multiplier.clone(),
                c.f.clone(),
                c.g.clone(),
                num(c.lambda.re),
                num(c.lambda.im),
                num(c.commutator.deviation),
                String::new(),
                String::new(),
                c.status.as_str().to_string(),
            ]);
        }
        for p in &probes {
            rows.push(vec![
                "probe".to_string(),
                p.multiplier.clone(),
                p.f.clone(),
                p.g.clone(),
                num(p.lambda.re),
                num(p.lambda.im),
                num(p.probe.comm_ff.deviation.max(p.probe.comm_fg_adj.deviation)),
                num(p.probe.ratio_ff),
                num(p.probe.ratio_adj),
                p.status.as_str().to_string(),
            ]);
        }
        out.csv(
            "fock.csv",
            &header(&[
                "kind",
                "multiplier",
                "f",
                "g",
                "lambda_re",
                "lambda_im",
                "deviation",
                "ratio_ff",
                "ratio_adj",
                "status",
            ]),
            &rows,
        )?;
        let results = FockResults {
            a0: standard_constant(self.dim),
            lattice: LatticeInfo::of(&self.fock),
            commutators,
            probes,
        };
        write_report(out, "fock.json", "fock", loaded, Some(self.dim), status, warnings, results)?;
        Ok(status)
    }
}

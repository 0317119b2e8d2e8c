use kglab_core::kernel::{
    covariance_check, locality_report, odd_control, pair, pair_kg_residual, translation_check, KernelConfig,
    KgSide, Verdict,
};
use kglab_core::{EvenPolynomial, LorentzMatrix, Polynomial, SpacetimePoint, TestFunction};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{write_report, Plan, Planned};
use crate::config::{lorentz, Loaded, Suite};
use crate::report::{header, num, Output, Status};
use crate::RunError;

/// Rounding floor of the antisymmetry comparison, in units of the scale.
const ROUNDING_FLOOR: f64 = 4.0 * f64::EPSILON;

enum Case {
    Locality,
    Antisymmetry,
    Kg(KgSide),
    Translation(SpacetimePoint),
    Covariance(LorentzMatrix),
    OddControl(Polynomial),
}

struct Job {
    suite: Suite,
    label: String,
    kernel: Option<EvenPolynomial>,
    f: TestFunction,
    g: TestFunction,
    case: Case,
}

struct VerifyPlan {
    cfg: KernelConfig,
    suites: Vec<Suite>,
    jobs: Vec<Job>,
}

#[derive(Debug, Serialize)]
struct Outcome {
    case: String,
    status: Status,
    metric: f64,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    details: Value,
}

#[derive(Debug, Serialize)]
struct SuiteResult {
    suite: Suite,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    cases: Vec<Outcome>,
}

pub fn plan(loaded: &Loaded) -> Planned {
    let cfg = loaded.kernel()?;
    let block = loaded
        .config
        .verify
        .as_ref()
        .ok_or_else(|| loaded.error(None, "`verify` needs a [verify] table"))?;
    let v = block.get_ref();
    let mut suites = Vec::new();
    for s in &v.suites {
        if !suites.contains(s) {
            suites.push(*s);
        }
    }
    let mut jobs = Vec::new();
    let label = |f: &str, g: &str, k: &str| format!("f={f} g={g} kernel={k}");
    let fg = |f: &str, g: &str, span: std::ops::Range<usize>| -> Result<(TestFunction, TestFunction), RunError> {
        Ok((loaded.function(f, span.clone())?.clone(), loaded.function(g, span)?.clone()))
    };
    for &suite in &suites {
        match suite {
            Suite::Locality | Suite::Antisymmetry => {
                let list = if suite == Suite::Locality { &v.locality } else { &v.antisymmetry };
                for e in list {
                    let s = e.get_ref();
                    let (f, g) = fg(&s.f, &s.g, e.span())?;
                    jobs.push(Job {
                        suite,
                        label: label(&s.f, &s.g, &s.kernel),
                        kernel: Some(loaded.even(&s.kernel, e.span())?),
                        f,
                        g,
                        case: if suite == Suite::Locality { Case::Locality } else { Case::Antisymmetry },
                    });
                }
            }
            Suite::Kg => {
                for e in &v.kg {
                    let s = e.get_ref();
                    let (f, g) = fg(&s.f, &s.g, e.span())?;
                    let side = match s.side {
                        KgSide::F => "f",
                        KgSide::G => "g",
                    };
                    jobs.push(Job {
                        suite,
                        label: format!("{} side={side}", label(&s.f, &s.g, &s.kernel)),
                        kernel: Some(loaded.even(&s.kernel, e.span())?),
                        f,
                        g,
                        case: Case::Kg(s.side),
                    });
                }
            }
            Suite::Translation => {
                for e in &v.translation {
                    let s = e.get_ref();
                    let (f, g) = fg(&s.f, &s.g, e.span())?;
                    let shift = SpacetimePoint::new(s.shift.clone())
                        .map_err(|err| loaded.error(Some(e.span()), format!("shift: {err}")))?;
                    loaded.check_dim(shift.dim(), "shift", e.span())?;
                    jobs.push(Job {
                        suite,
                        label: format!("{} shift={:?}", label(&s.f, &s.g, &s.kernel), s.shift),
                        kernel: Some(loaded.even(&s.kernel, e.span())?),
                        f,
                        g,
                        case: Case::Translation(shift),
                    });
                }
            }
            Suite::Covariance => {
                for e in &v.covariance {
                    let s = e.get_ref();
                    let (f, g) = fg(&s.f, &s.g, e.span())?;
                    let m = lorentz(cfg.dim, &s.transforms)
                        .map_err(|err| loaded.error(Some(e.span()), format!("transforms: {err}")))?;
                    for t in [&f, &g] {
                        t.lorentz_transform(&m)
                            .map_err(|err| loaded.error(Some(e.span()), format!("covariance: {err}")))?;
                    }
                    jobs.push(Job {
                        suite,
                        label: format!("{} transforms={}", label(&s.f, &s.g, &s.kernel), s.transforms.len()),
                        kernel: Some(loaded.even(&s.kernel, e.span())?),
                        f,
                        g,
                        case: Case::Covariance(m),
                    });
                }
            }
            Suite::OddControl => {
                for e in &v.odd_control {
                    let s = e.get_ref();
                    let (f, g) = fg(&s.f, &s.g, e.span())?;
                    let p = loaded.polynomial(&s.polynomial, e.span())?.clone();
                    loaded.check_dim(p.dim(), &format!("polynomial `{}`", s.polynomial), e.span())?;
                    if !p.is_odd() {
                        return Err(loaded
                            .error(Some(e.span()), format!("odd control polynomial `{}` is not odd", s.polynomial))
                            .into());
                    }
                    jobs.push(Job {
                        suite,
                        label: format!("f={} g={} polynomial={}", s.f, s.g, s.polynomial),
                        kernel: None,
                        f,
                        g,
                        case: Case::OddControl(p),
                    });
                }
            }
        }
    }
    Ok(Box::new(VerifyPlan { cfg, suites, jobs }))
}

fn outcome(label: &str, status: Status, metric: f64, threshold: f64, reason: Option<String>, details: Value) -> Outcome {
    Outcome {
        case: label.to_string(),
        status,
        metric,
        threshold,
        reason,
        details,
    }
}

fn run_job(j: &Job, cfg: &KernelConfig) -> kglab_core::Result<Outcome> {
    let tol = &cfg.tolerances;
    let kernel = j.kernel.as_ref();
    Ok(match &j.case {
        Case::Locality => {
            let r = locality_report(kernel.unwrap(), &j.f, &j.g, cfg)?;
            let (status, reason) = match r.verdict {
                Verdict::Pass => (Status::Pass, None),
                Verdict::Fail => (Status::Fail, None),
                Verdict::Inconclusive => (
                    Status::Inconclusive,
                    Some("quadrature error estimate straddles the locality threshold".to_string()),
                ),
                Verdict::Advisory => (
                    Status::Advisory,
                    Some("test functions are not compactly supported; no locality claim".to_string()),
                ),
                Verdict::NotApplicable => (
                    Status::NotApplicable,
                    Some("supports are not certified spacelike separated; test skipped".to_string()),
                ),
            };
            outcome(&j.label, status, r.magnitude, r.threshold, reason, json!(r))
        }
        Case::Antisymmetry => {
            let a = pair(kernel.unwrap(), &j.f, &j.g, cfg)?;
            let b = pair(kernel.unwrap(), &j.g, &j.f, cfg)?;
            let sym = (a.value + b.value).norm();
            let real = kernel.unwrap().as_polynomial().is_real();
            let re = if real { a.value.re.abs() } else { 0.0 };
            let threshold = tol.antisym * a.value.norm() + ROUNDING_FLOOR * a.scale.max(b.scale);
            let metric = sym.max(re);
            let (status, reason) = if metric > threshold {
                (Status::Fail, None)
            } else if !(a.converged && b.converged) {
                (Status::Inconclusive, Some("quadrature not converged".to_string()))
            } else {
                (Status::Pass, None)
            };
            let reason = reason.or((!real).then(|| "complex kernel: real-part check not applicable".to_string()));
            outcome(
                &j.label,
                status,
                metric,
                threshold,
                reason,
                json!({ "fg": a, "gf": b, "sum_abs": sym, "real_abs": re }),
            )
        }
        Case::Kg(side) => {
            let r = pair_kg_residual(kernel.unwrap(), &j.f, &j.g, cfg, *side)?;
            let target = match side {
                KgSide::F => &j.f,
                KgSide::G => &j.g,
            };
            let threshold = if target.is_compact() { tol.kg_compact } else { tol.kg };
            let (status, reason) = match (r.residual <= threshold, r.resolution_adequate) {
                (true, true) => (Status::Pass, None),
                (true, false) => (Status::Pass, Some("bump grid resolution flagged inadequate".to_string())),
                (false, false) => (
                    Status::Inconclusive,
                    Some("bump grid resolution inadequate for the Klein-Gordon image".to_string()),
                ),
                (false, true) => (Status::Fail, None),
            };
            outcome(&j.label, status, r.residual, threshold, reason, json!(r))
        }
        Case::Translation(shift) => {
            let dev = translation_check(kernel.unwrap(), shift, &j.f, &j.g, cfg)?;
            let status = if dev <= tol.translation { Status::Pass } else { Status::Fail };
            outcome(&j.label, status, dev, tol.translation, None, json!({ "deviation": dev }))
        }
        Case::Covariance(m) => {
            let r = covariance_check(kernel.unwrap(), m, &j.f, &j.g, cfg)?;
            let (status, reason) = if r.deviation > tol.covariance {
                (Status::Fail, None)
            } else if !r.converged {
                (Status::Inconclusive, Some("quadrature not converged".to_string()))
            } else {
                (Status::Pass, None)
            };
            outcome(&j.label, status, r.deviation, tol.covariance, reason, json!(r))
        }
        Case::OddControl(p) => {
            let r = odd_control(p, &j.f, &j.g, cfg)?;
            let threshold = tol.antisym * r.symmetric_part + ROUNDING_FLOOR * r.scale;
            let signal = tol.local * r.scale;
            let (status, reason) = if r.antisymmetric_part > threshold {
                (Status::Fail, Some("odd kernel produced an antisymmetric component".to_string()))
            } else if r.symmetric_part <= signal {
                (
                    Status::Inconclusive,
                    Some("symmetric part below the locality tolerance; control carries no signal".to_string()),
                )
            } else {
                (
                    Status::Pass,
                    Some("negative control: odd kernel gives a symmetric, nonzero form as expected".to_string()),
                )
            };
            outcome(&j.label, status, r.antisymmetric_part, threshold, reason, json!(r))
        }
    })
}

impl Plan for VerifyPlan {
    fn run(&self, loaded: &Loaded, out: &Output) -> Result<Status, RunError> {
        let outcomes = self
            .jobs
            .par_iter()
            .map(|j| run_job(j, &self.cfg))
            .collect::<kglab_core::Result<Vec<_>>>()?;
        let mut tagged: Vec<(Suite, Outcome)> =
            self.jobs.iter().map(|j| j.suite).zip(outcomes).collect();
        let mut results = Vec::new();
        for &suite in &self.suites {
            let cases: Vec<Outcome> = {
                let (mine, rest): (Vec<_>, Vec<_>) = tagged.into_iter().partition(|(s, _)| *s == suite);
                tagged = rest;
                mine.into_iter().map(|(_, o)| o).collect()
            };
            let (status, reason) = if cases.is_empty() {
                (Status::NotApplicable, Some("no cases configured".to_string()))
            } else {
                (Status::combine(cases.iter().map(|c| c.status)), None)
            };
            results.push(SuiteResult { suite, status, reason, cases });
        }
        let status = Status::combine(results.iter().map(|r| r.status));
        let rows: Vec<Vec<String>> = results
            .iter()
            .flat_map(|r| {
                r.cases.iter().map(move |c| {
                    vec![
                        r.suite.name().to_string(),
                        c.case.clone(),
                        c.status.as_str().to_string(),
                        num(c.metric),
                        num(c.threshold),
                        c.reason.clone().unwrap_or_default(),
                    ]
                })
            })
            .collect();
        out.csv("verify.csv", &header(&["suite", "case", "status", "metric", "threshold", "reason"]), &rows)?;
        write_report(out, "verify.json", "verify", loaded, Some(self.cfg.dim), status, self.cfg.warnings(), results)?;
        Ok(status)
    }
}

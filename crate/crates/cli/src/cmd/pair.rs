use kglab_core::kernel::{pair, KernelConfig};
use kglab_core::{EvenPolynomial, TestFunction};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{write_report, Plan, Planned};
use crate::config::{Loaded, PairSpec};
use crate::report::{header, num, Output, Status};
use crate::RunError;

struct Job {
    spec: PairSpec,
    kernel: EvenPolynomial,
    f: TestFunction,
    g: TestFunction,
}

struct PairPlan {
    cfg: KernelConfig,
    jobs: Vec<Job>,
}

#[derive(Debug, Serialize)]
struct Row {
    f: String,
    g: String,
    kernel: String,
    value: Complex64,
    error_estimate: f64,
    scale: f64,
    converged: bool,
    status: Status,
}

pub fn plan(loaded: &Loaded) -> Planned {
    let cfg = loaded.kernel()?;
    if loaded.config.pairs.is_empty() {
        return Err(loaded.error(None, "`pair` needs at least one [[pairs]] entry").into());
    }
    let mut jobs = Vec::new();
    for p in &loaded.config.pairs {
        let s = p.get_ref();
        jobs.push(Job {
            spec: s.clone(),
            kernel: loaded.even(&s.kernel, p.span())?,
            f: loaded.function(&s.f, p.span())?.clone(),
            g: loaded.function(&s.g, p.span())?.clone(),
        });
    }
    Ok(Box::new(PairPlan { cfg, jobs }))
}

impl Plan for PairPlan {
    fn run(&self, loaded: &Loaded, out: &Output) -> Result<Status, RunError> {
        let rows = self
            .jobs
            .par_iter()
            .map(|j| {
                let r = pair(&j.kernel, &j.f, &j.g, &self.cfg)?;
                Ok(Row {
                    f: j.spec.f.clone(),
                    g: j.spec.g.clone(),
                    kernel: j.spec.kernel.clone(),
                    value: r.value,
                    error_estimate: r.error_estimate,
                    scale: r.scale,
                    converged: r.converged,
                    status: if r.converged { Status::Pass } else { Status::Inconclusive },
                })
            })
            .collect::<Result<Vec<Row>, kglab_core::Error>>()?;
        let status = Status::combine(rows.iter().map(|r| r.status));
        let csv: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.f.clone(),
                    r.g.clone(),
                    r.kernel.clone(),
                    num(r.value.re),
                    num(r.value.im),
                    num(r.error_estimate),
                    num(r.scale),
                    r.converged.to_string(),
                    r.status.as_str().to_string(),
                ]
            })
            .collect();
        out.csv(
            "pair.csv",
            &header(&["f", "g", "kernel", "re", "im", "error_estimate", "scale", "converged", "status"]),
            &csv,
        )?;
        write_report(out, "pair.json", "pair", loaded, Some(self.cfg.dim), status, self.cfg.warnings(), rows)?;
        Ok(status)
    }
}

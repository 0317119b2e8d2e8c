use kglab_core::psqrt::{
    classify_cases, evenness_check, sqrt_field, square_check, BandRow, CaseReport, EvennessReport, MultiplierField,
    SamplerConfig, SqrtCase, SquareCheck,
};
use serde::Serialize;

use super::{write_report, Plan, Planned};
use crate::config::{Loaded, SqrtBlock};
use crate::report::{header, num, Output, Status};
use crate::RunError;

/// B² = A must hold to this many units of f64::EPSILON·|A|.
pub const SQUARE_ULPS: f64 = 4.0;
/// Relative B(p) − B(−p) bound for even sources.
pub const EVENNESS_TOL: f64 = 1e-12;

struct Entry {
    name: String,
    expect: Option<SqrtCase>,
    field: MultiplierField,
}

struct SqrtPlan {
    block: SqrtBlock,
    sampler: SamplerConfig,
    entries: Vec<Entry>,
}

#[derive(Debug, Serialize)]
struct FieldResult {
    polynomial: String,
    dimension: usize,
    status: Status,
    reasons: Vec<String>,
    case: SqrtCase,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<SqrtCase>,
    classification: CaseReport,
    evenness: EvennessReport,
    square: SquareCheck,
}

pub fn plan(loaded: &Loaded) -> Planned {
    let block = loaded
        .config
        .sqrt
        .as_ref()
        .ok_or_else(|| loaded.error(None, "`sqrt-analyze` needs a [sqrt] table"))?;
    let b = block.get_ref();
    if b.fields.is_empty() {
        return Err(loaded.error(Some(block.span()), "[sqrt] needs at least one [[sqrt.fields]] entry").into());
    }
    if b.square_check_points == 0 {
        return Err(loaded.error(Some(block.span()), "square_check_points must be >= 1").into());
    }
    let mut entries = Vec::new();
    for e in &b.fields {
        let s = e.get_ref();
        let p = loaded.polynomial(&s.polynomial, e.span())?.clone();
        entries.push(Entry {
            name: s.polynomial.clone(),
            expect: s.expect,
            field: sqrt_field(p),
        });
    }
    Ok(Box::new(SqrtPlan {
        block: b.clone(),
        sampler: b.sampler(loaded.config.seed),
        entries,
    }))
}

fn band_rows(name: &str, rows: &[BandRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| vec![name.to_string(), num(r.eps_im), r.hits.to_string(), num(r.fraction)])
        .collect()
}

impl Plan for SqrtPlan {
    fn run(&self, loaded: &Loaded, out: &Output) -> Result<Status, RunError> {
        let mut results = Vec::new();
        for e in &self.entries {
            let classification = classify_cases(&e.field, &self.sampler)?;
            let evenness = evenness_check(&e.field, &self.sampler)?;
            let square = square_check(&e.field, &self.sampler, self.block.square_check_points);
            let case = classification.case;
            let mut reasons = Vec::new();
            let mut status = Status::Pass;
            if let Some(d) = &classification.diagnostic {
                reasons.push(d.clone());
            }
            if case == SqrtCase::Undetermined {
                status = Status::Inconclusive;
                reasons.push("case could not be determined from the samples".to_string());
            }
            if let Some(x) = e.expect {
                if x != case {
                    status = Status::Fail;
                    reasons.push(format!("expected case {}, found {}", x.label(), case.label()));
                }
            }
            if square.max_ulps > SQUARE_ULPS {
                status = Status::Fail;
                reasons.push(format!("B^2 = A violated by {} ulp", square.max_ulps));
            }
            if !evenness.skipped && evenness.max_deviation > EVENNESS_TOL {
                status = Status::Fail;
                reasons.push(format!("B not even: deviation {}", evenness.max_deviation));
            }
            if let Some(n) = &evenness.notice {
                reasons.push(n.clone());
            }
            results.push(FieldResult {
                polynomial: e.name.clone(),
                dimension: e.field.dim(),
                status,
                reasons,
                case,
                expected: e.expect,
                classification,
                evenness,
                square,
            });
        }
        let status = Status::combine(results.iter().map(|r| r.status));
        let bands: Vec<Vec<String>> = results
            .iter()
            .flat_map(|r| band_rows(&r.polynomial, &r.classification.band_table))
            .collect();
        out.csv("sqrt_bands.csv", &header(&["polynomial", "eps_im", "hits", "fraction"]), &bands)?;
        for r in &results {
            let d = r.dimension;
            let mut cols: Vec<String> = (0..d).map(|i| format!("p{i}")).collect();
            cols.extend((0..d).map(|i| format!("pp{i}")));
            cols.extend(["b_re", "b_im", "bp_re", "bp_im"].map(String::from));
            let rows: Vec<Vec<String>> = r
                .classification
                .discontinuities
                .iter()
                .map(|s| {
                    let mut row: Vec<String> = s.p.iter().chain(&s.p_prime).map(|v| num(*v)).collect();
                    row.extend([s.b.re, s.b.im, s.b_prime.re, s.b_prime.im].map(num));
                    row
                })
                .collect();
            out.csv(&format!("sqrt_discontinuities_{}.csv", r.polynomial), &cols, &rows)?;
        }
        let dim = results.first().map(|r| r.dimension);
        write_report(out, "sqrt.json", "sqrt-analyze", loaded, dim, status, Vec::new(), results)?;
        Ok(status)
    }
}

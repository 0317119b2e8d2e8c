use kglab_core::minkowski::{Figure1Region, RegionVerdict, SEGMENT_TOLERANCE};
use kglab_core::SpacetimePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{write_report, Plan, Planned};
use crate::config::{Figure1Block, Loaded};
use crate::report::{header, num, Output, Status};
use crate::RunError;

/// Segments have slope |dx¹/dt| below this.
const MAX_SPEED: f64 = 0.8;
/// A segment must clear every piece of the gray region by this margin.
const CLEARANCE: f64 = 1e-9;

struct Figure1Plan {
    block: Figure1Block,
    region: Figure1Region,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct CellCounts {
    total: usize,
    gray: usize,
    complement: usize,
    /// Gray cells outside both cones, i.e. in the double cone or its degenerate segment.
    between_cones: usize,
    cell_area: f64,
    gray_area: f64,
}

#[derive(Debug, Serialize)]
struct Segment {
    start: [f64; 2],
    end: [f64; 2],
    /// Smallest margin to the gray region along the segment.
    clearance: f64,
}

#[derive(Debug, Serialize)]
struct Figure1Results {
    x: Vec<f64>,
    lightlike: bool,
    cells: CellCounts,
    segments_requested: usize,
    segments_found: usize,
    attempts: usize,
    segments: Vec<Segment>,
}

pub fn plan(loaded: &Loaded) -> Planned {
    let block = loaded
        .config
        .figure1
        .as_ref()
        .ok_or_else(|| loaded.error(None, "`figure1` needs a [figure1] table"))?;
    let b = block.get_ref();
    let err = |m: String| -> RunError { loaded.error(Some(block.span()), format!("[figure1]: {m}")).into() };
    let x = SpacetimePoint::new(b.x.clone()).map_err(|e| err(e.to_string()))?;
    if x.dim() < 2 {
        return Err(err("x needs at least two coordinates".into()));
    }
    let region = Figure1Region::new(x).map_err(|e| err(e.to_string()))?;
    for (name, r) in [("t_range", b.t_range), ("x_range", b.x_range)] {
        if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
            return Err(err(format!("{name} must be an increasing pair")));
        }
    }
    if b.cells[0] == 0 || b.cells[1] == 0 {
        return Err(err("cells must be positive".into()));
    }
    if !(b.segment_length > 0.0 && b.segment_length.is_finite()) {
        return Err(err("segment_length must be > 0".into()));
    }
    Ok(Box::new(Figure1Plan {
        block: b.clone(),
        region,
        seed: loaded.config.seed,
    }))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Signed margins of q against the closed cones: ≤ 0 means inside.
fn past_margin(q: &[f64]) -> f64 {
    q[0] + norm(&q[1..])
}

fn future_margin(q: &[f64]) -> f64 {
    -q[0] + norm(&q[1..])
}

impl Figure1Plan {
    fn point(&self, t: f64, x1: f64) -> Vec<f64> {
        let mut q = vec![0.0; self.block.x.len()];
        q[0] = t;
        q[1] = x1;
        q
    }

    fn shifted(&self, q: &[f64]) -> Vec<f64> {
        q.iter().zip(&self.block.x).map(|(a, b)| a - b).collect()
    }

    fn in_cones(&self, q: &[f64]) -> bool {
        past_margin(q) <= 0.0 || future_margin(&self.shifted(q)) <= 0.0
    }

    /// Convex margin functions whose joint positivity means q is outside the region.
    fn margins(&self, q: &[f64]) -> [f64; 3] {
        let qx = self.shifted(q);
        let middle = if self.region.is_lightlike() {
            let x = &self.block.x;
            let xx: f64 = x.iter().map(|v| v * v).sum();
            let s = (q.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / xx).clamp(0.0, 1.0);
            let d: Vec<f64> = q.iter().zip(x).map(|(a, b)| a - s * b).collect();
            norm(&d) - SEGMENT_TOLERANCE
        } else {
            future_margin(q).max(past_margin(&qx))
        };
        [past_margin(q), future_margin(&qx), middle]
    }

    /// Minimum over the segment of each convex margin, by golden-section search.
    fn clearance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let at = |s: f64, k: usize| {
            let q = self.point(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]));
            self.margins(&q)[k]
        };
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        (0..3)
            .map(|k| {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..100 {
                    let m1 = hi - phi * (hi - lo);
                    let m2 = lo + phi * (hi - lo);
                    if at(m1, k) < at(m2, k) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                at(0.0, k).min(at(1.0, k)).min(at(0.5 * (lo + hi), k))
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn sample_segments(&self) -> kglab_core::Result<(Vec<Segment>, usize)> {
        let b = &self.block;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut found = Vec::new();
        let mut attempts = 0;
        while found.len() < b.segments && attempts < b.max_attempts {
            attempts += 1;
            let t0 = rng.random_range(b.t_range[0]..b.t_range[1]);
            let x0 = rng.random_range(b.x_range[0]..b.x_range[1]);
            let v = rng.random_range(-MAX_SPEED..MAX_SPEED);
            let step = b.segment_length / (1.0 + v * v).sqrt();
            let end = [t0 + step, x0 + v * step];
            if end[0] > b.t_range[1] || end[1] < b.x_range[0] || end[1] > b.x_range[1] {
                continue;
            }
            let start = [t0, x0];
            let clearance = self.clearance(start, end);
            if clearance <= CLEARANCE {
                continue;
            }
            // Cross-check against the library classifier along the segment.
            let mut clear = true;
            for i in 0..=32 {
                let s = i as f64 / 32.0;
                let q = self.point(t0 + s * (end[0] - t0), x0 + s * (end[1] - x0));
                if self.region.classify(&SpacetimePoint::new(q)?)? != RegionVerdict::InComplement {
                    clear = false;
                    break;
                }
            }
            if clear {
                found.push(Segment { start, end, clearance });
            }
        }
        Ok((found, attempts))
    }
}

impl Plan for Figure1Plan {
    fn run(&self, loaded: &Loaded, out: &Output) -> Result<Status, RunError> {
        let b = &self.block;
        let [nt, nx] = b.cells;
        let dt = (b.t_range[1] - b.t_range[0]) / nt as f64;
        let dx = (b.x_range[1] - b.x_range[0]) / nx as f64;
        let mut rows = Vec::with_capacity(nt * nx);
        let (mut gray, mut between) = (0, 0);
        for i in 0..nt {
            let t = b.t_range[0] + (i as f64 + 0.5) * dt;
            for j in 0..nx {
                let x1 = b.x_range[0] + (j as f64 + 0.5) * dx;
                let q = self.point(t, x1);
                let verdict = self.region.classify(&SpacetimePoint::new(q.clone())?)?;
                let label = match verdict {
                    RegionVerdict::InGray => {
                        gray += 1;
                        if !self.in_cones(&q) {
                            between += 1;
                        }
                        "gray"
                    }
                    RegionVerdict::InComplement => "complement",
                };
                rows.push(vec![num(t), num(x1), label.to_string()]);
            }
        }
        out.csv("figure1_grid.csv", &header(&["t", "x1", "region"]), &rows)?;
        let (segments, attempts) = self.sample_segments()?;
        let seg_rows: Vec<Vec<String>> = segments
            .iter()
            .enumerate()
            .map(|(k, s)| {
                vec![k.to_string(), num(s.start[0]), num(s.start[1]), num(s.end[0]), num(s.end[1])]
            })
            .collect();
        out.csv("figure1_segments.csv", &header(&["segment", "t0", "x0", "t1", "x1"]), &seg_rows)?;
        let total = nt * nx;
        let status = if segments.len() == b.segments { Status::Pass } else { Status::Inconclusive };
        let mut warnings = Vec::new();
        if status == Status::Inconclusive {
            warnings.push(format!(
                "found {} of {} complement segments in {attempts} attempts",
                segments.len(),
                b.segments
            ));
        }
        let results = Figure1Results {
            x: b.x.clone(),
            lightlike: self.region.is_lightlike(),
            cells: CellCounts {
                total,
                gray,
                complement: total - gray,
                between_cones: between,
                cell_area: dt * dx,
                gray_area: gray as f64 * dt * dx,
            },
            segments_requested: b.segments,
            segments_found: segments.len(),
            attempts,
            segments,
        };
        write_report(out, "figure1.json", "figure1", loaded, Some(b.x.len()), status, warnings, results)?;
        Ok(status)
    }
}

//! Principal square roots of complex polynomials and the structure of their
//! discontinuity set S = {p : A(p) ≤ 0}.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;

/// Principal branch, −π < arg z ≤ π. A negative real with Im z = +0 maps to
/// the upper imaginary axis; Im z = −0 is treated as lying below the cut.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let t = ((z.re.abs() + z.re.hypot(z.im)) / 2.0).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// True for a negative real whose imaginary part is a negative zero, the one
/// input where the floating-point result differs from the exact branch choice.
pub fn below_cut_zero(z: Complex64) -> bool {
    z.re < 0.0 && z.im == 0.0 && z.im.is_sign_negative()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqrtCase {
    /// S is empty; B is real analytic.
    #[serde(rename = "i")]
    Empty,
    /// S is all of ℝᵈ; A is real and B continuous.
    #[serde(rename = "ii")]
    Everywhere,
    /// S is a proper subset; B may jump across a null set.
    #[serde(rename = "iii")]
    Proper,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl SqrtCase {
    pub fn label(self) -> &'static str {
        match self {
            Self::Empty => "i",
            Self::Everywhere => "ii",
            Self::Proper => "iii",
            Self::Undetermined => "undetermined",
        }
    }
}

/// B(p) = √A(p) for a complex polynomial A.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierField {
    source: Polynomial,
    case: SqrtCase,
}

pub fn sqrt_field(a: Polynomial) -> MultiplierField {
    MultiplierField {
        source: a,
        case: SqrtCase::Undetermined,
    }
}

impl MultiplierField {
    pub fn source(&self) -> &Polynomial {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn case(&self) -> SqrtCase {
        self.case
    }

    pub fn with_case(mut self, case: SqrtCase) -> Self {
        self.case = case;
        self
    }

    pub fn eval(&self, p: &[f64]) -> Complex64 {
        principal_sqrt(self.source.eval(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub count: usize,
    /// Samples are drawn uniformly from [−half_width, half_width]^d.
    pub half_width: f64,
    pub seed: u64,
    /// Band tolerance used for the reported hit fraction.
    pub eps_im: f64,
    pub eps_table: Vec<f64>,
    pub max_discontinuities: usize,
    /// Final separation |p − p′| of a bisected discontinuity pair, relative to the box.
    pub resolution: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            count: 1_000_000,
            half_width: 1.0,
            seed: 0,
            eps_im: 1e-6,
            eps_table: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            max_discontinuities: 16,
            resolution: 1e-9,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count < 10_000 {
            return Err(Error::InvalidInput(format!(
                "sample count must be >= 10000, got {}",
                self.count
            )));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidInput("box half width must be > 0".into()));
        }
        for &e in self.eps_table.iter().chain([&self.eps_im]) {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidInput(format!("band tolerance must be > 0, got {e}")));
            }
        }
        if !(self.resolution > 0.0 && self.resolution < 1.0) {
            return Err(Error::InvalidInput("resolution must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandRow {
    pub eps_im: f64,
    pub hits: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscontinuitySample {
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
    pub b: Complex64,
    pub b_prime: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: SqrtCase,
    pub s_hit_fraction: f64,
    pub band_table: Vec<BandRow>,
    /// Slope of log(hit fraction) against log(eps_im); None with fewer than two nonzero rows.
    pub band_slope: Option<f64>,
    pub real_coefficients: bool,
    pub certificate: Option<String>,
    pub below_cut_zeros: u64,
    pub discontinuities: Vec<DiscontinuitySample>,
    pub diagnostic: Option<String>,
}

const SAMPLE_CHUNK: usize = 1 << 16;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn draw(rng: &mut ChaCha8Rng, half_width: f64, buf: &mut [f64]) {
    for v in buf.iter_mut() {
        *v = half_width * (2.0 * rng.random::<f64>() - 1.0);
    }
}

/// Applies `f` to every sample point, chunked with independent seeded streams;
/// results are merged in chunk order.
fn for_samples<T, F>(dim: usize, sampler: &SamplerConfig, stream_offset: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, &mut [f64], usize) -> T + Sync,
{
    let chunks = sampler.count.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(sampler.seed, stream_offset + c);
            let mut buf = vec![0.0; dim];
            let n = SAMPLE_CHUNK.min(sampler.count - c * SAMPLE_CHUNK);
            f(&mut rng, &mut buf, n)
        })
        .collect()
}

#[derive(Default, Clone)]
struct BandCounts {
    s_exact: u64,
    band: Vec<u64>,
    base: u64,
    below_cut: u64,
}

fn band_ratio(a: Complex64) -> f64 {
    if a.re <= 0.0 {
        a.im.abs() / (1.0 + a.norm())
    } else {
        f64::INFINITY
    }
}

fn sign_certificate(a: &Polynomial, sign: f64) -> bool {
    // s·A is a constant > 0 plus even-exponent monomials with coefficients ≥ 0.
    if !a.is_real() {
        return false;
    }
    let zero = vec![0u32; a.dim()];
    if sign * a.coefficient(&zero).re <= 0.0 {
        return false;
    }
    a.terms()
        .all(|(e, c)| e.iter().all(|k| k % 2 == 0) && sign * c.re >= 0.0)
}

fn fit_slope(rows: &[BandRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.hits > 0)
        .map(|r| (r.eps_im.ln(), r.fraction.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Monte Carlo classification of S into the three cases.
pub fn classify_cases(field: &MultiplierField, sampler: &SamplerConfig) -> Result<CaseReport> {
    sampler.validate()?;
    let a = field.source();
    let dim = a.dim();
    let eps = &sampler.eps_table;
    let partial = for_samples(dim, sampler, 0, |rng, buf, n| {
        let mut c = BandCounts {
            band: vec![0; eps.len()],
            ..Default::default()
        };
        for _ in 0..n {
            draw(rng, sampler.half_width, buf);
            let v = a.eval(buf);
            if v.re <= 0.0 && v.im == 0.0 {
                c.s_exact += 1;
            }
            if below_cut_zero(v) {
                c.below_cut += 1;
            }
            let r = band_ratio(v);
            for (k, e) in eps.iter().enumerate() {
                if r <= *e {
                    c.band[k] += 1;
                }
            }
            if r <= sampler.eps_im {
                c.base += 1;
            }
        }
        c
    });
    let mut total = BandCounts {
        band: vec![0; eps.len()],
        ..Default::default()
    };
    for c in partial {
        total.s_exact += c.s_exact;
        total.base += c.base;
        total.below_cut += c.below_cut;
        for (t, v) in total.band.iter_mut().zip(&c.band) {
            *t += v;
        }
    }
    let count = sampler.count as f64;
    let band_table: Vec<BandRow> = eps
        .iter()
        .zip(&total.band)
        .map(|(&e, &h)| BandRow {
            eps_im: e,
            hits: h,
            fraction: h as f64 / count,
        })
        .collect();
    let band_slope = fit_slope(&band_table);
    let real = a.is_real();
    let positive = sign_certificate(a, 1.0);
    let negative = sign_certificate(a, -1.0);
    let certificate = if positive {
        Some("A = c + sum of even monomials with nonnegative coefficients, c > 0".to_string())
    } else if negative {
        Some("-A = c + sum of even monomials with nonnegative coefficients, c > 0".to_string())
    } else {
        None
    };
    let widest = total.band.iter().copied().max().unwrap_or(total.base).max(total.base);

    let mut diagnostic = None;
    let (case, s_hit_fraction) = if real {
        let frac = total.s_exact as f64 / count;
        let case = if total.s_exact == 0 {
            if positive {
                SqrtCase::Empty
            } else {
                diagnostic = Some(
                    "no sample hit S but no positivity certificate for A; S may be nonempty \
                     outside the sampled box"
                        .to_string(),
                );
                SqrtCase::Undetermined
            }
        } else if total.s_exact as usize == sampler.count {
            if !negative {
                diagnostic = Some(
                    "every sample hit S; A <= 0 not certified symbolically".to_string(),
                );
            }
            SqrtCase::Everywhere
        } else {
            SqrtCase::Proper
        };
        if positive && total.s_exact > 0 {
            diagnostic = Some("positivity certificate conflicts with sampled hits".to_string());
            (SqrtCase::Undetermined, frac)
        } else {
            (case, frac)
        }
    } else {
        let frac = total.base as f64 / count;
        let case = if widest == 0 {
            SqrtCase::Empty
        } else if total.base as usize == sampler.count {
            diagnostic = Some(
                "Im A is not identically zero, yet every sample lies in the tolerance band"
                    .to_string(),
            );
            SqrtCase::Undetermined
        } else {
            SqrtCase::Proper
        };
        (case, frac)
    };

    let discontinuities = if real {
        Vec::new()
    } else {
        find_discontinuities(field, sampler)
    };

    Ok(CaseReport {
        case,
        s_hit_fraction,
        band_table,
        band_slope,
        real_coefficients: real,
        certificate,
        below_cut_zeros: total.below_cut,
        discontinuities,
        diagnostic,
    })
}

/// Pairs (p, p′) straddling a sign change of Im A inside Re A < 0, bisected
/// down to the configured resolution, whose root values differ by ≥ |B(p)|/2.
pub fn find_discontinuities(
    field: &MultiplierField,
    sampler: &SamplerConfig,
) -> Vec<DiscontinuitySample> {
    let a = field.source();
    let dim = a.dim();
    let step = sampler.half_width / 16.0;
    let target = sampler.resolution * sampler.half_width;
    let per_chunk = for_samples(dim, sampler, 1 << 32, |rng, buf, n| {
        let mut out = Vec::new();
        let mut dir = vec![0.0; dim];
        for _ in 0..n {
            if out.len() >= sampler.max_discontinuities {
                break;
            }
            draw(rng, sampler.half_width, buf);
            draw(rng, 1.0, &mut dir);
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let mut lo = buf.to_vec();
            let mut hi: Vec<f64> = lo.iter().zip(&dir).map(|(x, u)| x + step * u / norm).collect();
            let (alo, ahi) = (a.eval(&lo), a.eval(&hi));
            if alo.re >= 0.0 || ahi.re >= 0.0 || alo.im * ahi.im >= 0.0 {
                continue;
            }
            let sign_lo = alo.im.signum();
            let mut gap = step;
            let mut mid = vec![0.0; dim];
            let mut degenerate = false;
            while gap > target {
                for i in 0..dim {
                    mid[i] = 0.5 * (lo[i] + hi[i]);
                }
                let am = a.eval(&mid);
                if am.im == 0.0 {
                    degenerate = true;
                    break;
                }
                if am.im.signum() == sign_lo {
                    lo.copy_from_slice(&mid);
                } else {
                    hi.copy_from_slice(&mid);
                }
                gap *= 0.5;
            }
            if degenerate {
                continue;
            }
            let (alo, ahi) = (a.eval(&lo), a.eval(&hi));
            if alo.re >= 0.0 || ahi.re >= 0.0 {
                continue;
            }
            let (b, bp) = (principal_sqrt(alo), principal_sqrt(ahi));
            if (b - bp).norm() >= b.norm() / 2.0 {
                out.push(DiscontinuitySample {
                    p: lo,
                    p_prime: hi,
                    b,
                    b_prime: bp,
                });
            }
        }
        out
    });
    per_chunk
        .into_iter()
        .flatten()
        .take(sampler.max_discontinuities)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvennessReport {
    pub skipped: bool,
    pub notice: Option<String>,
    /// max |B(p) − B(−p)| / |B(p)| over the points (absolute where B(p) = 0).
    pub max_deviation: f64,
    pub points: usize,
}

/// Evenness of B on an explicit point set.
pub fn evenness_on_points<'a, I>(field: &MultiplierField, points: I) -> EvennessReport
where
    I: IntoIterator<Item = &'a [f64]>,
{
    if !field.source().is_even() {
        return EvennessReport {
            skipped: true,
            notice: Some("source polynomial is not even; evenness check skipped".into()),
            max_deviation: f64::NAN,
            points: 0,
        };
    }
    let mut worst = 0.0f64;
    let mut n = 0;
    let mut neg = vec![0.0; field.dim()];
    for p in points {
        for (m, v) in neg.iter_mut().zip(p) {
            *m = -v;
        }
        let b = field.eval(p);
        let diff = (b - field.eval(&neg)).norm();
        let dev = if b.norm() > 0.0 { diff / b.norm() } else { diff };
        worst = worst.max(dev);
        n += 1;
    }
    EvennessReport {
        skipped: false,
        notice: None,
        max_deviation: worst,
        points: n,
    }
}

pub fn evenness_check(field: &MultiplierField, sampler: &SamplerConfig) -> Result<EvennessReport> {
    sampler.validate()?;
    let dim = field.dim();
    let pts: Vec<Vec<f64>> = {
        let mut rng = chunk_rng(sampler.seed, usize::MAX);
        let mut buf = vec![0.0; dim];
        (0..sampler.count.min(100_000))
            .map(|_| {
                draw(&mut rng, sampler.half_width, &mut buf);
                buf.clone()
            })
            .collect()
    };
    Ok(evenness_on_points(field, pts.iter().map(|p| p.as_slice())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareCheck {
    pub points: usize,
    /// max |B² − A| in units of f64::EPSILON·|A|.
    pub max_ulps: f64,
}

/// Checks B(p)² = A(p) on `points` uniform samples.
pub fn square_check(field: &MultiplierField, sampler: &SamplerConfig, points: usize) -> SquareCheck {
    let a = field.source();
    let cfg = SamplerConfig {
        count: points,
        ..sampler.clone()
    };
    let worst = for_samples(a.dim(), &cfg, 2 << 32, |rng, buf, n| {
        let mut worst = 0.0f64;
        for _ in 0..n {
            draw(rng, cfg.half_width, buf);
            let v = a.eval(buf);
            let b = principal_sqrt(v);
            if v.norm() > 0.0 {
                worst = worst.max((b * b - v).norm() / (f64::EPSILON * v.norm()));
            }
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max);
    SquareCheck {
        points,
        max_ulps: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_values() {
        assert_eq!(principal_sqrt(c(1.0, 0.0)), c(1.0, 0.0));
        assert_eq!(principal_sqrt(c(-1.0, 0.0)), c(0.0, 1.0));
        assert_eq!(principal_sqrt(c(-4.0, 0.0)), c(0.0, 2.0));
        assert_eq!(principal_sqrt(c(0.0, 0.0)), c(0.0, 0.0));
        let below = principal_sqrt(c(-1.0, -1e-9));
        assert!((below - c(0.0, -1.0)).norm() < 1e-9);
        assert!(below_cut_zero(c(-1.0, -0.0)));
        assert!(!below_cut_zero(c(-1.0, 0.0)));
        assert_eq!(principal_sqrt(c(-1.0, -0.0)), c(0.0, -1.0));
    }

    proptest! {
        #[test]
        fn square_and_range(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let z = c(re, im);
            let w = principal_sqrt(z);
            prop_assert!(w.re >= 0.0);
            if w.re == 0.0 { prop_assert!(w.im >= 0.0 || z.im.is_sign_negative()); }
            prop_assert!((w * w - z).norm() <= 4.0 * f64::EPSILON * z.norm());
        }

        #[test]
        fn agrees_with_library_off_the_cut(re in -1e3f64..1e3, im in 1e-6f64..1e3, s in prop::bool::ANY) {
            let z = c(re, if s { im } else { -im });
            prop_assert!((principal_sqrt(z) - z.sqrt()).norm() <= 1e-14 * z.norm().sqrt());
        }
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let rows: Vec<BandRow> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| BandRow { eps_im: e, hits: 1, fraction: 3.0 * e })
            .collect();
        assert!((fit_slope(&rows).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn certificates() {
        let a = Polynomial::from_real_terms(2, [(vec![0, 0], 1.0), (vec![2, 2], 1.0)]).unwrap();
        assert!(sign_certificate(&a, 1.0));
        assert!(!sign_certificate(&a, -1.0));
        let b = Polynomial::from_real_terms(2, [(vec![0, 0], 1.0), (vec![1, 1], 1.0)]).unwrap();
        assert!(!sign_certificate(&b, 1.0));
    }
}

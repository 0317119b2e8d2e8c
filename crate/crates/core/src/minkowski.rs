//! Causal structure of Minkowski space with signature (+,-,...,-).
//!
//! Coordinates are stored time-first. All predicates treat the light cones as
//! closed sets, so the complement of a cone region is open.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for membership in degenerate (lightlike) segments.
pub const SEGMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpacetimePoint(Vec<f64>);

impl SpacetimePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "spacetime dimension must be at least 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim.max(2)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

/// Minkowski product x·y = x₀y₀ − Σ xᵢyᵢ of two coordinate slices.
pub fn minkowski_dot(x: &[f64], y: &[f64]) -> f64 {
    let spatial: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum();
    x[0] * y[0] - spatial
}

/// Squared interval (x − y)².
pub fn interval(x: &SpacetimePoint, y: &SpacetimePoint) -> Result<f64> {
    x.check_dim(y)?;
    let dt = x.time() - y.time();
    let dr2: f64 = x
        .spatial()
        .iter()
        .zip(y.spatial())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(dt * dt - dr2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Separation {
    Spacelike,
    Timelike,
    Lightlike,
}

pub fn classify(x: &SpacetimePoint, y: &SpacetimePoint) -> Result<Separation> {
    classify_with_tolerance(x, y, 0.0)
}

pub fn classify_with_tolerance(
    x: &SpacetimePoint,
    y: &SpacetimePoint,
    tolerance: f64,
) -> Result<Separation> {
    let s = interval(x, y)?;
    Ok(if s.abs() <= tolerance {
        Separation::Lightlike
    } else if s > 0.0 {
        Separation::Timelike
    } else {
        Separation::Spacelike
    })
}

/// Euclidean ball in all spacetime coordinates, the support carrier for test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRegion {
    center: SpacetimePoint,
    radius: f64,
}

impl BallRegion {
    pub fn new(center: SpacetimePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &SpacetimePoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, x: &SpacetimePoint) -> bool {
        let d2: f64 = x
            .coords()
            .iter()
            .zip(self.center.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 <= self.radius * self.radius
    }

    pub fn translated(&self, a: &SpacetimePoint) -> Self {
        Self {
            center: self.center.add(a),
            radius: self.radius,
        }
    }
}

/// Sufficient condition for every pair of points in the two balls to be
/// spacelike separated. `false` makes no claim.
pub fn regions_spacelike_separated(r1: &BallRegion, r2: &BallRegion) -> Result<bool> {
    r1.center.check_dim(&r2.center)?;
    let dt = (r1.center.time() - r2.center.time()).abs();
    let dr: f64 = r1
        .center
        .spatial()
        .iter()
        .zip(r2.center.spatial())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let rsum = r1.radius + r2.radius;
    Ok(dr - rsum > dt + rsum)
}

fn in_future_cone(v: &[f64]) -> bool {
    v[0] >= 0.0 && minkowski_dot(v, v) >= 0.0
}

fn in_past_cone(v: &[f64]) -> bool {
    v[0] <= 0.0 && minkowski_dot(v, v) >= 0.0
}

/// Causal diamond (V₊ + a) ∩ (V₋ + b) for future-directed timelike b − a.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCone {
    lower: SpacetimePoint,
    upper: SpacetimePoint,
}

impl DoubleCone {
    pub fn new(lower: SpacetimePoint, upper: SpacetimePoint) -> Result<Self> {
        let s = interval(&upper, &lower)?;
        if !(s > 0.0 && upper.time() > lower.time()) {
            return Err(Error::InvalidInput(
                "double cone apexes must be future-directed timelike".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &SpacetimePoint {
        &self.lower
    }

    pub fn upper(&self) -> &SpacetimePoint {
        &self.upper
    }

    pub fn contains(&self, x: &SpacetimePoint) -> bool {
        x.dim() == self.lower.dim()
            && in_future_cone(x.sub(&self.lower).coords())
            && in_past_cone(x.sub(&self.upper).coords())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionVerdict {
    InGray,
    InComplement,
}

/// Region (V₊ + x) ∪ V₋ ∪ D(0, x) for future-directed causal `x`, optionally
/// re-anchored so that the role of the origin is played by `base`.
///
/// For lightlike `x` the double cone degenerates to the segment from 0 to x,
/// and membership is tested within [`SEGMENT_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Region {
    base: SpacetimePoint,
    apex: SpacetimePoint,
    lightlike: bool,
    segment_tolerance: f64,
}

impl Figure1Region {
    pub fn new(apex: SpacetimePoint) -> Result<Self> {
        Self::anchored(SpacetimePoint::origin(apex.dim()), apex)
    }

    /// Region with the origin moved to `base` and the upper apex at `apex`.
    pub fn anchored(base: SpacetimePoint, apex: SpacetimePoint) -> Result<Self> {
        base.check_dim(&apex)?;
        let rel = apex.sub(&base);
        let sep = classify(&rel, &SpacetimePoint::origin(rel.dim()))?;
        if sep == Separation::Spacelike {
            return Err(Error::InvalidInput(
                "the gray region is only defined for timelike or lightlike x".into(),
            ));
        }
        if rel.time() <= 0.0 {
            return Err(Error::InvalidInput("x must be future-directed".into()));
        }
        Ok(Self {
            base,
            apex,
            lightlike: sep == Separation::Lightlike,
            segment_tolerance: SEGMENT_TOLERANCE,
        })
    }

    pub fn with_segment_tolerance(mut self, tolerance: f64) -> Self {
        self.segment_tolerance = tolerance;
        self
    }

    pub fn apex(&self) -> &SpacetimePoint {
        &self.apex
    }

    pub fn base(&self) -> &SpacetimePoint {
        &self.base
    }

    pub fn is_lightlike(&self) -> bool {
        self.lightlike
    }

    pub fn classify(&self, probe: &SpacetimePoint) -> Result<RegionVerdict> {
        self.apex.check_dim(probe)?;
        let from_base = probe.sub(&self.base);
        let from_apex = probe.sub(&self.apex);
        let p = from_base.coords();
        let gray = in_past_cone(p)
            || in_future_cone(from_apex.coords())
            || if self.lightlike {
                self.near_segment(p)
            } else {
                in_future_cone(p) && in_past_cone(from_apex.coords())
            };
        Ok(if gray {
            RegionVerdict::InGray
        } else {
            RegionVerdict::InComplement
        })
    }

    fn near_segment(&self, p: &[f64]) -> bool {
        let rel = self.apex.sub(&self.base);
        let x = rel.coords();
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let px: f64 = p.iter().zip(x).map(|(a, b)| a * b).sum();
        let s = (px / xx).clamp(0.0, 1.0);
        let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - s * b).powi(2)).sum();
        d2.sqrt() <= self.segment_tolerance
    }
}

/// Verdict of `probe` against the gray region anchored at the origin and `x`.
pub fn figure1_region_mask(x: &SpacetimePoint, probe: &SpacetimePoint) -> Result<RegionVerdict> {
    Figure1Region::new(x.clone())?.classify(probe)
}

/// A d×d matrix acting on coordinate vectors, checked to preserve the metric
/// and the direction of time.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzMatrix(DMatrix<f64>);

impl LorentzMatrix {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || d < 2 {
            return Err(Error::NotLorentz("matrix must be square with d >= 2".into()));
        }
        let eta = metric(d);
        let defect = (m.transpose() * &eta * &m - &eta).amax();
        if defect > Self::TOLERANCE {
            return Err(Error::NotLorentz(format!(
                "metric defect {defect:.3e} exceeds {:.0e}",
                Self::TOLERANCE
            )));
        }
        if m[(0, 0)] < 1.0 - Self::TOLERANCE {
            return Err(Error::NotLorentz(format!(
                "time component {} < 1 reverses the time direction",
                m[(0, 0)]
            )));
        }
        if m.determinant() < 0.0 {
            return Err(Error::NotLorentz("determinant -1 (improper)".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Pure boost with the given rapidity along spatial axis `axis` (1-based).
    pub fn boost(dim: usize, axis: usize, rapidity: f64) -> Result<Self> {
        if axis == 0 || axis >= dim {
            return Err(Error::InvalidInput(format!("boost axis {axis} out of range")));
        }
        let mut m = DMatrix::identity(dim, dim);
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        m[(0, 0)] = ch;
        m[(axis, axis)] = ch;
        m[(0, axis)] = sh;
        m[(axis, 0)] = sh;
        Self::new(m)
    }

    /// Spatial rotation by `angle` in the plane of spatial axes `i` and `j` (1-based).
    pub fn rotation(dim: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        if i == 0 || j == 0 || i >= dim || j >= dim || i == j {
            return Err(Error::InvalidInput(format!("rotation plane ({i},{j}) invalid")));
        }
        let mut m = DMatrix::identity(dim, dim);
        let (c, s) = (angle.cos(), angle.sin());
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Self::new(m)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Λ⁻¹ = η Λᵀ η.
    pub fn inverse(&self) -> Self {
        let eta = metric(self.dim());
        Self(&eta * self.0.transpose() * &eta)
    }

    pub fn apply(&self, x: &SpacetimePoint) -> SpacetimePoint {
        let v = &self.0 * nalgebra::DVector::from_column_slice(x.coords());
        SpacetimePoint(v.iter().copied().collect())
    }
}

pub fn metric(dim: usize) -> DMatrix<f64> {
    let mut eta = DMatrix::identity(dim, dim);
    for i in 1..dim {
        eta[(i, i)] = -1.0;
    }
    eta
}

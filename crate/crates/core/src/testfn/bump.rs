//! Compactly supported radial bumps.
//!
//! The profile φ(ρ) = exp(1 − 1/(1 − ρ²)), ρ = |x − c|_E / R, is radial in the
//! Euclidean norm of all d coordinates. Its d-dimensional transform depends
//! only on |p|_E and equals the one-dimensional transform of the projection
//! g(t) = ∫ φ(√(t² + |u|²)/R) d^{d−1}u. The projection is sampled on a uniform
//! grid of N intervals across the support diameter; the transform at an
//! arbitrary momentum is the band-limited (trigonometric) interpolant of the
//! grid DFT, valid up to the Nyquist bound π/h.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::minkowski::{minkowski_dot, BallRegion, SpacetimePoint};
use crate::quadrature::gauss_legendre;

pub const DEFAULT_RESOLUTION: usize = 128;
const PROJECTION_NODES: usize = 160;

#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    support: BallRegion,
    resolution: usize,
    spacing: f64,
    /// g(j h) for j = 0..=N/2; the projection is even in t.
    projection: Vec<f64>,
    /// Masses of Klein-Gordon operators applied so far (spectral symbol).
    kg_masses: Vec<f64>,
}

impl BumpFunction {
    pub fn new(support: BallRegion) -> Result<Self> {
        Self::with_resolution(support, DEFAULT_RESOLUTION)
    }

    pub fn with_resolution(support: BallRegion, resolution: usize) -> Result<Self> {
        if resolution < 8 || !resolution.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "bump grid resolution must be a power of two >= 8, got {resolution}"
            )));
        }
        let radius = support.radius();
        let d = support.dim();
        let spacing = 2.0 * radius / resolution as f64;
        let (gx, gw) = gauss_legendre(PROJECTION_NODES);
        let sphere = sphere_area(d - 1);
        let projection = (0..=resolution / 2)
            .map(|j| {
                let t = j as f64 * spacing;
                let umax = (radius * radius - t * t).max(0.0).sqrt();
                if umax == 0.0 {
                    return 0.0;
                }
                let half = 0.5 * umax;
                let integral: f64 = gx
                    .iter()
                    .zip(&gw)
                    .map(|(x, w)| {
                        let u = half * (x + 1.0);
                        let rho = (t * t + u * u).sqrt() / radius;
                        w * half * profile(rho) * u.powi(d as i32 - 2)
                    })
                    .sum();
                sphere * integral
            })
            .collect();
        Ok(Self {
            support,
            resolution,
            spacing,
            projection,
            kg_masses: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn support(&self) -> &BallRegion {
        &self.support
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn kg_masses(&self) -> &[f64] {
        &self.kg_masses
    }

    /// Largest |p|_E representable on the grid.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing
    }

    /// Projection samples g(t_j) over the full grid t_j = −R + j h, j = 0..=N.
    pub fn grid_samples(&self) -> Vec<f64> {
        let half = self.resolution / 2;
        (0..=self.resolution)
            .map(|j| self.projection[j.abs_diff(half)])
            .collect()
    }

    pub fn grid_spacing(&self) -> f64 {
        self.spacing
    }

    /// Radial transform F(k) = h Σ_j g(t_j) cos(k t_j), by Clenshaw recurrence.
    pub fn radial_transform(&self, k: f64) -> Result<f64> {
        let k = k.abs();
        let nyq = self.nyquist();
        if k > nyq * (1.0 + 1e-12) {
            return Err(Error::OutOfBand { norm: k, nyquist: nyq });
        }
        let theta = k * self.spacing;
        let c = theta.cos();
        let (mut b1, mut b2) = (0.0, 0.0);
        for &g in self.projection[1..].iter().rev() {
            let b0 = 2.0 * g + 2.0 * c * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        // Σ_{j>=1} 2g_j cos(jθ) = b1 cos θ − b2 (Clenshaw with c_0 = 0).
        Ok(self.spacing * (self.projection[0] + b1 * c - b2))
    }

    pub fn fourier(&self, p: &[f64]) -> Result<Complex64> {
        let k = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radial = self.radial_transform(k)?;
        let p2 = minkowski_dot(p, p);
        let symbol: f64 = self.kg_masses.iter().map(|m| m * m - p2).product();
        let phase = minkowski_dot(p, self.support.center().coords());
        Ok(Complex64::from_polar(symbol * radial, phase))
    }

    /// (f̃(p₀, p), f̃(−p₀, p)): both share the radial factor and the symbol.
    pub fn fourier_sheets(&self, p: &[f64]) -> Result<(Complex64, Complex64)> {
        let k = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radial = self.radial_transform(k)?;
        let p2 = minkowski_dot(p, p);
        let amp = radial * self.kg_masses.iter().map(|m| m * m - p2).product::<f64>();
        let c = self.support.center().coords();
        let spatial = minkowski_dot(p, c) - p[0] * c[0];
        let t = p[0] * c[0];
        Ok((
            Complex64::from_polar(amp, spatial + t),
            Complex64::from_polar(amp, spatial - t),
        ))
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let c = self.support.center().coords();
        let radius = self.support.radius();
        let y: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
        let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt() / radius;
        if rho >= 1.0 {
            return 0.0;
        }
        let phi = profile(rho);
        match self.kg_masses.as_slice() {
            [] => phi,
            [m] => {
                // (□ + m²) of a radial function, written without 1/r factors.
                let u = 1.0 - rho * rho;
                let d = self.dim() as f64;
                let sigma = minkowski_dot(&y, &y);
                let r2 = radius * radius;
                sigma * phi * (4.0 / u.powi(4) - 8.0 / u.powi(3)) / (r2 * r2)
                    - 2.0 * (2.0 - d) * phi / (u * u * r2)
                    + m * m * phi
            }
            _ => unreachable!("apply_klein_gordon rejects repeated application"),
        }
    }

    pub fn translate(&self, a: &SpacetimePoint) -> Self {
        Self {
            support: self.support.translated(a),
            ..self.clone()
        }
    }

    /// (□ + m²) f by spectral differentiation: the grid transform is
    /// multiplied by the symbol m² − p². The boolean reports whether the
    /// differentiated spectrum is adequately resolved below Nyquist.
    pub fn apply_klein_gordon(&self, mass: f64) -> Result<(Self, bool)> {
        if !self.kg_masses.is_empty() {
            return Err(Error::Unsupported(
                "repeated Klein-Gordon application on a bump".into(),
            ));
        }
        let mut out = self.clone();
        out.kg_masses.push(mass);
        let adequate = out.spectral_tail_fraction(mass) <= RESOLUTION_TAIL_LIMIT;
        Ok((out, adequate))
    }

    /// Largest |(m² + k²) F(k)| over the top quarter of the band, relative to
    /// its maximum over the whole band.
    pub fn spectral_tail_fraction(&self, mass: f64) -> f64 {
        let nyq = self.nyquist();
        let n = 1024;
        let (mut peak, mut tail) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let k = i as f64 * nyq / n as f64;
            let f = self.radial_transform(k).expect("inside band");
            let e = ((mass * mass + k * k) * f).abs();
            peak = peak.max(e);
            if 4 * i >= 3 * n {
                tail = tail.max(e);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }
}

pub const RESOLUTION_TAIL_LIMIT: f64 = 1e-4;

pub fn profile(rho: f64) -> f64 {
    if rho >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

/// Surface area of the unit sphere in ℝⁿ, 2π^{n/2} / Γ(n/2).
pub fn sphere_area(n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    2.0 * pi.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Γ(n/2) for a positive integer n.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while x < n as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

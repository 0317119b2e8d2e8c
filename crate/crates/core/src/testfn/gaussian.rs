//! Gaussian wave packets with polynomial prefactors.
//!
//! A packet is f(x) = Re[P(y) exp(−½ yᵀQy + i k·y)] with y = x − a, Q
//! symmetric positive definite and k = −η q for the momentum-space tilt q.
//! The class is closed under translations, Lorentz maps and the Klein-Gordon
//! operator, and every transform is available in closed form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::minkowski::{LorentzMatrix, SpacetimePoint};
use crate::polynomial::Polynomial;

const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    center: SpacetimePoint,
    precision: DMatrix<f64>,
    tilt: Vec<f64>,
    prefactor: Polynomial,
    // Derived from the above at construction.
    covariance: Vec<f64>,
    norm: f64,
    transform_poly: Polynomial,
}

impl GaussianPacket {
    /// Axis-aligned packet exp(−Σ (x_μ − a_μ)² / 2σ_μ²).
    pub fn new(center: SpacetimePoint, widths: &[f64]) -> Result<Self> {
        if widths.len() != center.dim() {
            return Err(Error::DimensionMismatch {
                expected: center.dim(),
                actual: widths.len(),
            });
        }
        if widths.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput("Gaussian widths must be positive".into()));
        }
        let d = center.dim();
        let precision =
            DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, widths.iter().map(|s| 1.0 / (s * s))));
        Self::general(center, precision, vec![0.0; d], Polynomial::one(d))
    }

    pub fn isotropic(center: SpacetimePoint, width: f64) -> Result<Self> {
        let widths = vec![width; center.dim()];
        Self::new(center, &widths)
    }

    /// Fully general packet. `tilt` is the momentum q at which the transform
    /// is recentered; `prefactor` is a polynomial in y = x − center.
    pub fn general(
        center: SpacetimePoint,
        precision: DMatrix<f64>,
        tilt: Vec<f64>,
        prefactor: Polynomial,
    ) -> Result<Self> {
        let d = center.dim();
        if d > MAX_DIM {
            return Err(Error::InvalidInput(format!("dimension {d} exceeds {MAX_DIM}")));
        }
        if precision.nrows() != d || precision.ncols() != d || tilt.len() != d || prefactor.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: precision.nrows(),
            });
        }
        let asym = (&precision - precision.transpose()).amax();
        if asym > 1e-12 * precision.amax() {
            return Err(Error::InvalidInput("precision matrix must be symmetric".into()));
        }
        let chol = nalgebra::Cholesky::new(precision.clone())
            .ok_or_else(|| Error::InvalidInput("precision matrix must be positive definite".into()))?;
        let covariance = chol.inverse();
        let det = chol.determinant();
        let norm = (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) / det.sqrt();
        let transform_poly = transform_polynomial(&prefactor, &covariance);
        Ok(Self {
            center,
            precision,
            tilt,
            prefactor,
            covariance: covariance.transpose().as_slice().to_vec(),
            norm,
            transform_poly,
        })
    }

    pub fn with_tilt(self, tilt: Vec<f64>) -> Result<Self> {
        Self::general(self.center, self.precision, tilt, self.prefactor)
    }

    pub fn with_prefactor(self, prefactor: Polynomial) -> Result<Self> {
        Self::general(self.center, self.precision, self.tilt, prefactor)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &SpacetimePoint {
        &self.center
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn tilt(&self) -> &[f64] {
        &self.tilt
    }

    pub fn prefactor(&self) -> &Polynomial {
        &self.prefactor
    }

    /// Euclidean phase vector k = −η q.
    fn phase_vector(&self) -> Vec<f64> {
        self.tilt
            .iter()
            .enumerate()
            .map(|(i, q)| if i == 0 { -q } else { *q })
            .collect()
    }

    fn exponent_gradient(&self) -> Vec<Polynomial> {
        // ∂_j φ = −(Qy)_j + i k_j
        let d = self.dim();
        let k = self.phase_vector();
        (0..d)
            .map(|j| {
                let mut terms: Vec<(Vec<u32>, Complex64)> = (0..d)
                    .filter(|&l| self.precision[(j, l)] != 0.0)
                    .map(|l| {
                        let mut e = vec![0; d];
                        e[l] = 1;
                        (e, Complex64::new(-self.precision[(j, l)], 0.0))
                    })
                    .collect();
                terms.push((vec![0; d], Complex64::new(0.0, k[j])));
                Polynomial::from_terms(d, terms).expect("valid shape")
            })
            .collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let y: Vec<f64> = x.iter().zip(self.center.coords()).map(|(a, b)| a - b).collect();
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += y[i] * self.precision[(i, j)] * y[j];
            }
        }
        let phase: f64 = self.phase_vector().iter().zip(&y).map(|(k, y)| k * y).sum();
        let g = self.prefactor.eval(&y) * Complex64::from_polar((-0.5 * quad).exp(), phase);
        g.re
    }

    fn complex_transform(&self, p: &[f64]) -> Complex64 {
        let d = self.dim();
        let a = self.center.coords();
        let mut s = [0.0f64; MAX_DIM];
        let s = &mut s[..d];
        let mut pa = p[0] * a[0];
        s[0] = p[0] - self.tilt[0];
        for i in 1..d {
            s[i] = -p[i] + self.tilt[i];
            pa -= p[i] * a[i];
        }
        let mut quad = 0.0;
        for i in 0..d {
            let row = &self.covariance[i * d..(i + 1) * d];
            let mut acc = 0.0;
            for j in 0..d {
                acc += row[j] * s[j];
            }
            quad += s[i] * acc;
        }
        let envelope = self.norm * (-0.5 * quad).exp();
        self.transform_poly.eval(s) * Complex64::from_polar(envelope, pa)
    }

    /// f̃(p) = ∫ dx f(x) e^{i p·x}.
    pub fn fourier(&self, p: &[f64]) -> Complex64 {
        let d = self.dim();
        let mut neg = [0.0f64; MAX_DIM];
        for (n, v) in neg[..d].iter_mut().zip(p) {
            *n = -v;
        }
        0.5 * (self.complex_transform(p) + self.complex_transform(&neg[..d]).conj())
    }

    pub fn translate(&self, a: &SpacetimePoint) -> Self {
        Self {
            center: self.center.add(a),
            ..self.clone()
        }
    }

    /// (□ + m²) f, computed by exact differentiation of the prefactor.
    pub fn apply_klein_gordon(&self, mass: f64) -> Self {
        let grad = self.exponent_gradient();
        let derive = |p: &Polynomial, j: usize| &p.derivative(j) + &(p * &grad[j]);
        let mut out = self.prefactor.scale(Complex64::new(mass * mass, 0.0));
        for j in 0..self.dim() {
            let second = derive(&derive(&self.prefactor, j), j);
            out = if j == 0 { &out + &second } else { &out - &second };
        }
        Self::general(self.center.clone(), self.precision.clone(), self.tilt.clone(), out)
            .expect("shape preserved")
    }

    /// x ↦ f(Λ⁻¹x).
    pub fn lorentz_transform(&self, lambda: &LorentzMatrix) -> Result<Self> {
        if lambda.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: lambda.dim(),
            });
        }
        let inv = lambda.inverse();
        let li = inv.matrix();
        let precision = li.transpose() * &self.precision * li;
        let precision = 0.5 * (&precision + precision.transpose());
        let tilt = lambda.matrix() * nalgebra::DVector::from_column_slice(&self.tilt);
        Self::general(
            lambda.apply(&self.center),
            precision,
            tilt.iter().copied().collect(),
            self.prefactor.compose_linear(li)?,
        )
    }
}

/// H(s) with P(−i∂_s) exp(−½sᵀMs) = H(s) exp(−½sᵀMs).
fn transform_polynomial(prefactor: &Polynomial, covariance: &DMatrix<f64>) -> Polynomial {
    let d = prefactor.dim();
    let ms: Vec<Polynomial> = (0..d)
        .map(|j| {
            Polynomial::from_real_terms(
                d,
                (0..d).filter(|&l| covariance[(j, l)] != 0.0).map(|l| {
                    let mut e = vec![0; d];
                    e[l] = 1;
                    (e, covariance[(j, l)])
                }),
            )
            .expect("valid shape")
        })
        .collect();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut total = Polynomial::zero(d);
    for (e, c) in prefactor.terms() {
        let mut h = Polynomial::constant(d, c);
        for (j, &k) in e.iter().enumerate() {
            for _ in 0..k {
                h = (&h.derivative(j) - &(&h * &ms[j])).scale(minus_i);
            }
        }
        total = &total + &h;
    }
    total
}

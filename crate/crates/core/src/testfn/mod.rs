//! Real test functions with position- and momentum-space evaluators.

mod bump;
mod gaussian;

pub use bump::{profile, sphere_area, BumpFunction, DEFAULT_RESOLUTION, RESOLUTION_TAIL_LIMIT};
pub use gaussian::GaussianPacket;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::minkowski::{BallRegion, LorentzMatrix, SpacetimePoint};

/// Fourier and measure conventions shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FourierConvention {
    pub transform: &'static str,
    pub product: &'static str,
    pub signature: &'static str,
    pub measure: &'static str,
}

pub const CONVENTION: FourierConvention = FourierConvention {
    transform: "f~(p) = \u{222b} dx f(x) exp(+i p.x), no 2pi factors",
    product: "p.x = p0 x0 - sum_i p_i x_i",
    signature: "(+,-,...,-)",
    measure: "Delta_A(f,g) = \u{222b} dp A(p) sgn(p0) delta(p^2 - m^2) f~(p) g~(-p)",
};

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Gaussian(GaussianPacket),
    Bump(BumpFunction),
}

/// Result of applying the Klein-Gordon operator.
#[derive(Debug, Clone, PartialEq)]
pub struct KleinGordonImage {
    pub function: TestFunction,
    /// False when a bump's differentiated spectrum is not resolved below Nyquist.
    pub resolution_adequate: bool,
}

impl TestFunction {
    pub fn gaussian(center: SpacetimePoint, width: f64) -> Result<Self> {
        Ok(Self::Gaussian(GaussianPacket::isotropic(center, width)?))
    }

    pub fn bump(center: SpacetimePoint, radius: f64) -> Result<Self> {
        Ok(Self::Bump(BumpFunction::new(BallRegion::new(center, radius)?)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Gaussian(g) => g.dim(),
            Self::Bump(b) => b.dim(),
        }
    }

    /// Certified support bound; `None` for non-compact classes.
    pub fn support(&self) -> Option<&BallRegion> {
        match self {
            Self::Gaussian(_) => None,
            Self::Bump(b) => Some(b.support()),
        }
    }

    pub fn is_compact(&self) -> bool {
        self.support().is_some()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: n,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &SpacetimePoint) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok(match self {
            Self::Gaussian(g) => g.evaluate(x.coords()),
            Self::Bump(b) => b.evaluate(x.coords()),
        })
    }

    pub fn fourier(&self, p: &[f64]) -> Result<Complex64> {
        self.check_dim(p.len())?;
        match self {
            Self::Gaussian(g) => Ok(g.fourier(p)),
            Self::Bump(b) => b.fourier(p),
        }
    }

    /// (f̃(p₀, p), f̃(−p₀, p)), the two mass-shell sheets over one spatial momentum.
    pub fn fourier_sheets(&self, p: &[f64]) -> Result<(Complex64, Complex64)> {
        self.check_dim(p.len())?;
        match self {
            Self::Gaussian(g) => {
                let mut q = p.to_vec();
                let up = g.fourier(&q);
                q[0] = -q[0];
                Ok((up, g.fourier(&q)))
            }
            Self::Bump(b) => b.fourier_sheets(p),
        }
    }

    /// x ↦ f(x − a).
    pub fn translate(&self, a: &SpacetimePoint) -> Result<Self> {
        self.check_dim(a.dim())?;
        Ok(match self {
            Self::Gaussian(g) => Self::Gaussian(g.translate(a)),
            Self::Bump(b) => Self::Bump(b.translate(a)),
        })
    }

    /// Kf with K = □ + m², so that (Kf)~(p) = (m² − p²) f̃(p).
    pub fn apply_klein_gordon(&self, mass: f64) -> Result<KleinGordonImage> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be >= 0, got {mass}")));
        }
        Ok(match self {
            Self::Gaussian(g) => KleinGordonImage {
                function: Self::Gaussian(g.apply_klein_gordon(mass)),
                resolution_adequate: true,
            },
            Self::Bump(b) => {
                let (kb, ok) = b.apply_klein_gordon(mass)?;
                KleinGordonImage {
                    function: Self::Bump(kb),
                    resolution_adequate: ok,
                }
            }
        })
    }

    /// x ↦ f(Λ⁻¹x). Closed form for Gaussians; bumps are not closed under
    /// boosts (the support ball becomes an ellipsoid).
    pub fn lorentz_transform(&self, lambda: &LorentzMatrix) -> Result<Self> {
        match self {
            Self::Gaussian(g) => Ok(Self::Gaussian(g.lorentz_transform(lambda)?)),
            Self::Bump(_) => Err(Error::Unsupported(
                "Lorentz transformation of a compact bump".into(),
            )),
        }
    }

    /// Largest |p|_E at which the transform is available.
    pub fn band_limit(&self) -> f64 {
        match self {
            Self::Gaussian(_) => f64::INFINITY,
            Self::Bump(b) => b.nyquist(),
        }
    }
}

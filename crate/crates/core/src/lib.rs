//! Numerical laboratory for causal commutator kernels of free Klein-Gordon
//! fields.
//!
//! The central object is the smeared central commutator
//!
//! ```text
//! Δ_A(f, g) = ∫ dp A(p) sgn(p₀) δ(p² − m²) f̃(p) g̃(−p)
//! ```
//!
//! for an even polynomial `A`, evaluated by integrating out the mass-shell
//! delta analytically ([`kernel`]). Around it sit Minkowski causal geometry
//! ([`minkowski`]), test functions ([`testfn`]), the principal square root of
//! a polynomial symbol ([`psqrt`]) and a truncated Fock-space realization of
//! the corresponding fields ([`fock`]).

pub mod error;
pub mod fock;
pub mod kernel;
pub mod minkowski;
pub mod polynomial;
pub mod psqrt;
pub mod quadrature;
pub mod testfn;

pub use error::{Error, Result};
pub use kernel::{KernelConfig, PairingResult, Tolerances};
pub use minkowski::{BallRegion, LorentzMatrix, Separation, SpacetimePoint};
pub use polynomial::{EvenPolynomial, Polynomial};
pub use psqrt::{principal_sqrt, MultiplierField};
pub use testfn::{TestFunction, CONVENTION};

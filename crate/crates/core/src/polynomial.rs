//! Sparse multivariate polynomials with complex coefficients.
//!
//! Monomials are keyed by their exponent vectors. Exact zero coefficients are
//! never stored, so structural predicates (degree, parity, reality) are
//! well defined.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
    real: bool,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
            real: true,
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function p ↦ p_i.
    pub fn variable(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(e, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exponents: Vec<u32>, c: Complex64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: e.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite coefficient for {e:?}")));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Real polynomial from (exponents, coefficient) pairs.
    pub fn from_real_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        Self::from_terms(
            dim,
            terms.into_iter().map(|(e, c)| (e, Complex64::new(c, 0.0))),
        )
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(exponents) {
            Entry::Vacant(v) => {
                if c != zero {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                // Cancelled monomials are dropped so parity checks stay structural.
                if *o.get() == zero {
                    o.remove();
                }
            }
        }
        self.real = self.terms.values().all(|c| c.im == 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Complex64 {
        self.terms
            .get(exponents)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() % 2 == 1)
    }

    /// Evaluate at a real point.
    pub fn eval(&self, p: &[f64]) -> Complex64 {
        debug_assert_eq!(p.len(), self.dim);
        if self.real {
            let re: f64 = self
                .terms
                .iter()
                .map(|(e, c)| c.re * monomial_value(e, p))
                .sum();
            // Real polynomials evaluate with a +0 imaginary part, which keeps
            // the principal square root on the upper side of the cut.
            return Complex64::new(re, 0.0);
        }
        self.terms
            .iter()
            .map(|(e, c)| c * monomial_value(e, p))
            .sum()
    }

    /// Evaluate at a complex point.
    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = Complex64::new(1.0, 0.0);
                for (zi, &k) in z.iter().zip(e) {
                    m *= zi.powu(k);
                }
                c * m
            })
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
            .expect("scaling preserves shape")
    }

    pub fn conj(&self) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(e, c)| (e.clone(), c.conj())))
            .expect("conjugation preserves shape")
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.add_term(ne, c * e[i] as f64);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// The polynomial p ↦ self(L p) for a dim×dim matrix L, expanded exactly
    /// into monomials.
    pub fn compose_linear(&self, l: &DMatrix<f64>) -> Result<Self> {
        if l.nrows() != self.dim || l.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: l.nrows(),
            });
        }
        let images: Vec<Polynomial> = (0..self.dim)
            .map(|i| {
                Self::from_real_terms(
                    self.dim,
                    (0..self.dim).filter(|&j| l[(i, j)] != 0.0).map(|j| {
                        let mut e = vec![0; self.dim];
                        e[j] = 1;
                        (e, l[(i, j)])
                    }),
                )
                .expect("dimensions agree")
            })
            .collect();
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.dim, *c);
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    term = &term * &img.pow(k);
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Monomials of odd total degree.
    pub fn odd_part(&self) -> Self {
        Self::from_terms(
            self.dim,
            self.terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() % 2 == 1)
                .map(|(e, c)| (e.clone(), *c)),
        )
        .expect("shape preserved")
    }

    /// Largest coefficient modulus, 0 for the zero polynomial.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[inline]
fn monomial_value(e: &[u32], p: &[f64]) -> f64 {
    let mut m = 1.0;
    for (x, &k) in p.iter().zip(e) {
        if k > 0 {
            m *= x.powi(k as i32);
        }
    }
    m
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut acc: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        Polynomial::from_terms(self.dim, acc).expect("shape preserved")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let coeff = if c.im == 0.0 {
                    format!("{}", c.re)
                } else {
                    format!("({}{:+}i)", c.re, c.im)
                };
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("p{i}") } else { format!("p{i}^{k}") })
                    .collect();
                if vars.is_empty() {
                    coeff
                } else {
                    format!("{}*{}", coeff, vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A polynomial containing only monomials of even total degree, so that
/// A(−p) = A(p) holds identically.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPolynomial(Polynomial);

impl EvenPolynomial {
    pub fn new(p: Polynomial) -> Result<Self> {
        if let Some(e) = p.terms.keys().find(|e| e.iter().sum::<u32>() % 2 == 1) {
            return Err(Error::NotEven { exponents: e.clone() });
        }
        Ok(Self(p))
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self(Polynomial::constant(dim, c))
    }

    pub fn one(dim: usize) -> Self {
        Self(Polynomial::one(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self(Polynomial::zero(dim))
    }

    /// The invariant square p² = p₀² − |p⃗|².
    pub fn minkowski_square(dim: usize) -> Self {
        let terms = (0..dim).map(|i| {
            let mut e = vec![0; dim];
            e[i] = 2;
            (e, if i == 0 { 1.0 } else { -1.0 })
        });
        Self(Polynomial::from_real_terms(dim, terms).expect("valid shape"))
    }

    /// The polynomial p ↦ A(Λp).
    pub fn compose_linear(&self, l: &DMatrix<f64>) -> Result<Self> {
        Ok(Self(self.0.compose_linear(l)?))
    }

    pub fn into_inner(self) -> Polynomial {
        self.0
    }

    pub fn as_polynomial(&self) -> &Polynomial {
        &self.0
    }
}

impl Deref for EvenPolynomial {
    type Target = Polynomial;

    fn deref(&self) -> &Polynomial {
        &self.0
    }
}

impl TryFrom<Polynomial> for EvenPolynomial {
    type Error = Error;

    fn try_from(p: Polynomial) -> Result<Self> {
        Self::new(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = Polynomial::variable(2, 0);
        let z = &x - &x;
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
        let mixed = &x + &Polynomial::one(2);
        assert!(!mixed.is_even() && !mixed.is_odd());
    }

    #[test]
    fn even_validation() {
        let sq = EvenPolynomial::minkowski_square(4);
        assert_eq!(sq.degree(), 2);
        assert!(EvenPolynomial::new(Polynomial::variable(4, 0)).is_err());
        let x = Polynomial::variable(3, 1);
        let quartic = x.pow(4);
        assert!(EvenPolynomial::new(quartic).is_ok());
    }

    #[test]
    fn negative_constant_evaluates_with_positive_zero_imaginary_part() {
        let p = &Polynomial::constant(2, c(-1.0)) * &Polynomial::variable(2, 0).pow(2);
        let v = p.eval(&[-2.0, 1.0]);
        assert_eq!(v.re, -4.0);
        assert!(v.im == 0.0 && v.im.is_sign_positive());
    }

    #[test]
    fn boost_leaves_minkowski_square_invariant() {
        let a = EvenPolynomial::minkowski_square(4);
        let (ch, sh) = (0.5f64.cosh(), 0.5f64.sinh());
        let mut l = DMatrix::identity(4, 4);
        l[(0, 0)] = ch;
        l[(1, 1)] = ch;
        l[(0, 1)] = sh;
        l[(1, 0)] = sh;
        let b = a.compose_linear(&l).unwrap();
        for (e, coeff) in b.terms() {
            let expected = a.coefficient(e);
            assert!((coeff - expected).norm() < 1e-14, "{e:?}");
        }
    }

    fn arb_poly(dim: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(
            (prop::collection::vec(0u32..3, dim), -2.0f64..2.0, -2.0f64..2.0),
            0..6,
        )
        .prop_map(move |t| {
            Polynomial::from_terms(dim, t.into_iter().map(|(e, a, b)| (e, Complex64::new(a, b))))
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_operations_match_pointwise(
            a in arb_poly(3),
            b in arb_poly(3),
            p in prop::collection::vec(-1.5f64..1.5, 3),
        ) {
            let sum = (&a + &b).eval(&p);
            let prod = (&a * &b).eval(&p);
            let (va, vb) = (a.eval(&p), b.eval(&p));
            prop_assert!((sum - (va + vb)).norm() <= 1e-12 * (1.0 + va.norm() + vb.norm()));
            prop_assert!((prod - va * vb).norm() <= 1e-12 * (1.0 + va.norm() * vb.norm()));
        }

        #[test]
        fn composition_matches_pointwise(
            a in arb_poly(3),
            m in prop::collection::vec(-1.0f64..1.0, 9),
            p in prop::collection::vec(-1.5f64..1.5, 3),
        ) {
            let l = DMatrix::from_row_slice(3, 3, &m);
            let lp: Vec<f64> = (&l * nalgebra::DVector::from_column_slice(&p)).iter().copied().collect();
            let lhs = a.compose_linear(&l).unwrap().eval(&p);
            let rhs = a.eval(&lp);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
        }

        #[test]
        fn even_polynomials_are_symmetric(
            a in arb_poly(4),
            p in prop::collection::vec(-2.0f64..2.0, 4),
        ) {
            let even = Polynomial::from_terms(4, a.terms()
                .filter(|(e, _)| e.iter().sum::<u32>() % 2 == 0)
                .map(|(e, c)| (e.to_vec(), c))).unwrap();
            let even = EvenPolynomial::new(even).unwrap();
            let neg: Vec<f64> = p.iter().map(|x| -x).collect();
            prop_assert_eq!(even.eval(&p), even.eval(&neg));
        }
    }
}

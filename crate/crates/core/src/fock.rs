//! Truncated Fock-space realization of the free field and its multiplier
//! fields φ₀(Bf) on a finite momentum lattice.
//!
//! Commutators are evaluated on the safe subspace (total occupation
//! ≤ N_tot − 2), where two ladder steps never reach the truncation edge, so
//! the canonical relations hold exactly there. The safe subspace is applied
//! matrix-free; the full truncated matrices are only materialized when their
//! dimension is below the configured cap.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::shell_sum;
use crate::minkowski::regions_spacelike_separated;
use crate::polynomial::Polynomial;
use crate::psqrt::{evenness_on_points, MultiplierField};
use crate::quadrature::{MomentumRule, NodeSet};
use crate::testfn::TestFunction;

/// A₀ = (2π)^{−(d−1)}: the commutator constant of the standard free field
/// under the 2π-free pairing convention.
pub fn standard_constant(dim: usize) -> f64 {
    (2.0 * PI).powi(-(dim as i32 - 1))
}

/// Uniform spatial momentum grid, symmetric under p ↦ −p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeLattice {
    dim: usize,
    mass: f64,
    points_per_axis: usize,
    spacing: f64,
    momenta: Vec<Vec<f64>>,
    omegas: Vec<f64>,
    mirror: Vec<usize>,
    weight: f64,
}

impl ModeLattice {
    /// Axis coordinates (j − (K−1)/2)·Δp for j = 0..K; for m = 0 the origin
    /// mode (present for odd K) is dropped.
    pub fn new(dim: usize, mass: f64, points_per_axis: usize, spacing: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {dim}")));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be >= 0, got {mass}")));
        }
        if points_per_axis == 0 || !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidInput(
                "lattice needs at least one point per axis and a positive spacing".into(),
            ));
        }
        let sdim = dim - 1;
        let k = points_per_axis;
        let total = k
            .checked_pow(sdim as u32)
            .ok_or_else(|| Error::InvalidInput("mode lattice too large".into()))?;
        let axis: Vec<f64> = (0..k)
            .map(|j| (j as f64 - (k as f64 - 1.0) / 2.0) * spacing)
            .collect();
        let mut momenta = Vec::with_capacity(total);
        let mut raw_index = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = Vec::with_capacity(sdim);
            for _ in 0..sdim {
                p.push(axis[rem % k]);
                rem /= k;
            }
            if mass == 0.0 && p.iter().all(|v| *v == 0.0) {
                continue;
            }
            momenta.push(p);
            raw_index.push(idx);
        }
        if momenta.is_empty() {
            return Err(Error::InvalidInput("mode lattice has no modes".into()));
        }
        // The grid index of −p is (K−1−j) on every axis, i.e. total−1−idx.
        let position: BTreeMap<usize, usize> =
            raw_index.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mirror = raw_index.iter().map(|&r| position[&(total - 1 - r)]).collect();
        let omegas = momenta
            .iter()
            .map(|p| (p.iter().map(|v| v * v).sum::<f64>() + mass * mass).sqrt())
            .collect();
        Ok(Self {
            dim,
            mass,
            points_per_axis,
            spacing,
            momenta,
            omegas,
            mirror,
            weight: spacing.powi(sdim as i32),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn momentum(&self, k: usize) -> &[f64] {
        &self.momenta[k]
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omegas[k]
    }

    /// Index of the mode with momentum −p_k.
    pub fn mirror(&self, k: usize) -> usize {
        self.mirror[k]
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Largest spatial coordinate that is not aliased, π/Δp.
    pub fn position_window(&self) -> f64 {
        PI / self.spacing
    }

    /// √(w_k / ((2π)^{d−1} 2ω_k)).
    pub fn field_coefficient(&self, k: usize) -> f64 {
        (self.weight * standard_constant(self.dim) / (2.0 * self.omegas[k])).sqrt()
    }

    /// On-shell points (ω_k, p_k) followed by (−ω_k, −p_k).
    pub fn shell_points(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let mut up = Vec::with_capacity(self.dim);
        let mut down = Vec::with_capacity(self.dim);
        up.push(self.omegas[k]);
        down.push(-self.omegas[k]);
        for v in &self.momenta[k] {
            up.push(*v);
            down.push(-*v);
        }
        (up, down)
    }

    /// The lattice as a quadrature node set for the pairing.
    pub fn nodes(&self) -> NodeSet {
        let points = self.momenta.iter().flatten().copied().collect();
        NodeSet::new(self.dim - 1, points, vec![self.weight; self.len()])
            .expect("lattice nodes are well formed")
    }
}

/// Number of multisets of size ≤ n drawn from m modes, C(m + n, n).
pub fn truncated_dimension(modes: usize, n_tot: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=n_tot as u128 {
        c = c.saturating_mul(modes as u128 + i) / i;
    }
    c
}

pub const DEFAULT_DIMENSION_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFock {
    lattice: ModeLattice,
    n_tot: usize,
    cap: usize,
}

impl TruncatedFock {
    /// Rejects before allocation if the safe subspace (the only part ever
    /// materialized by commutator evaluation) exceeds `cap`.
    pub fn new(lattice: ModeLattice, n_tot: usize, cap: usize) -> Result<Self> {
        if n_tot < 2 {
            return Err(Error::InvalidInput(format!(
                "total occupation cap must be >= 2 for a nonempty safe subspace, got {n_tot}"
            )));
        }
        let safe = truncated_dimension(lattice.len(), n_tot - 2);
        if safe > cap as u128 {
            return Err(Error::DimensionCap {
                dimension: safe,
                cap,
            });
        }
        Ok(Self { lattice, n_tot, cap })
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    pub fn n_tot(&self) -> usize {
        self.n_tot
    }

    /// Per-mode occupation cutoff; the global cap makes it equal to N_tot.
    pub fn n_max(&self) -> usize {
        self.n_tot
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dimension(&self) -> u128 {
        truncated_dimension(self.lattice.len(), self.n_tot)
    }

    pub fn safe_dimension(&self) -> u128 {
        truncated_dimension(self.lattice.len(), self.n_tot - 2)
    }

    /// Occupation states as sorted mode-index lists, by total occupation then
    /// lexicographically.
    pub fn basis(&self) -> Result<Vec<Vec<u32>>> {
        let dim = self.dimension();
        if dim > self.cap as u128 {
            return Err(Error::DimensionCap { dimension: dim, cap: self.cap });
        }
        Ok(multisets(self.lattice.len(), self.n_tot))
    }

    fn safe_basis(&self) -> Vec<Vec<u32>> {
        multisets(self.lattice.len(), self.n_tot - 2)
    }
}

fn multisets(modes: usize, max_size: usize) -> Vec<Vec<u32>> {
    fn extend(modes: u32, size: usize, from: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for k in from..modes {
            cur.push(k);
            extend(modes, size, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 0..=max_size {
        extend(modes as u32, size, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// Sparse state: (occupation list, amplitude) sorted by occupation list,
/// without duplicates.
type State = Vec<(Vec<u32>, Complex64)>;

fn normalize(mut raw: Vec<(Vec<u32>, Complex64)>) -> State {
    raw.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: State = Vec::with_capacity(raw.len());
    for (k, v) in raw {
        match out.last_mut() {
            Some((last, acc)) if *last == k => *acc += v,
            _ => out.push((k, v)),
        }
    }
    out
}

fn lookup(state: &State, key: &[u32]) -> Complex64 {
    state
        .binary_search_by(|e| e.0.as_slice().cmp(key))
        .map(|i| state[i].1)
        .unwrap_or_default()
}

/// Σ_k (annihilation_k a_k + creation_k a_k†).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldOperator {
    pub annihilation: Vec<Complex64>,
    pub creation: Vec<Complex64>,
    pub warnings: Vec<String>,
}

impl FieldOperator {
    pub fn zero(modes: usize) -> Self {
        Self {
            annihilation: vec![Complex64::new(0.0, 0.0); modes],
            creation: vec![Complex64::new(0.0, 0.0); modes],
            warnings: Vec::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.annihilation.len()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            annihilation: self.annihilation.iter().map(|c| c * s).collect(),
            creation: self.creation.iter().map(|c| c * s).collect(),
            warnings: self.warnings.clone(),
        }
    }

    fn apply_basis(&self, s: &[u32], amp: Complex64, n_tot: usize, out: &mut Vec<(Vec<u32>, Complex64)>) {
        let mut i = 0;
        while i < s.len() {
            let k = s[i];
            let mut j = i;
            while j < s.len() && s[j] == k {
                j += 1;
            }
            let c = self.annihilation[k as usize];
            if c != Complex64::new(0.0, 0.0) {
                let mut t = s.to_vec();
                t.remove(i);
                out.push((t, c * amp * ((j - i) as f64).sqrt()));
            }
            i = j;
        }
        if s.len() >= n_tot {
            return;
        }
        for (k, c) in self.creation.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k = k as u32;
            let lo = s.partition_point(|&v| v < k);
            let hi = s.partition_point(|&v| v <= k);
            let mut t = Vec::with_capacity(s.len() + 1);
            t.extend_from_slice(&s[..hi]);
            t.push(k);
            t.extend_from_slice(&s[hi..]);
            out.push((t, c * amp * ((hi - lo + 1) as f64).sqrt()));
        }
    }

    fn apply(&self, state: &State, n_tot: usize) -> State {
        let mut out = Vec::new();
        for (s, amp) in state {
            self.apply_basis(s, *amp, n_tot, &mut out);
        }
        normalize(out)
    }

    /// Matrix entries (row, column, value) on the full truncated space.
    pub fn matrix(&self, fock: &TruncatedFock) -> Result<Vec<(usize, usize, Complex64)>> {
        self.check_modes(fock)?;
        let basis = fock.basis()?;
        let index: BTreeMap<&[u32], usize> =
            basis.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut entries = Vec::new();
        for (col, s) in basis.iter().enumerate() {
            let mut out = Vec::new();
            self.apply_basis(s, Complex64::new(1.0, 0.0), fock.n_tot, &mut out);
            for (t, v) in normalize(out) {
                entries.push((index[t.as_slice()], col, v));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        Ok(entries)
    }

    fn check_modes(&self, fock: &TruncatedFock) -> Result<()> {
        if self.modes() != fock.lattice.len() {
            return Err(Error::DimensionMismatch {
                expected: fock.lattice.len(),
                actual: self.modes(),
            });
        }
        Ok(())
    }
}

fn aliasing_warning(f: &TestFunction, lattice: &ModeLattice) -> Option<String> {
    let extent = match f {
        TestFunction::Bump(b) => {
            let s = b.support();
            s.center().spatial().iter().fold(0.0f64, |a, c| a.max(c.abs())) + s.radius()
        }
        TestFunction::Gaussian(g) => {
            let cov = g.precision().clone().try_inverse()?;
            (1..g.dim())
                .map(|i| g.center().coords()[i].abs() + 8.0 * cov[(i, i)].sqrt())
                .fold(0.0, f64::max)
        }
    };
    let window = lattice.position_window();
    (extent > window).then(|| {
        format!(
            "test function extends to |x_i| = {extent:.3}, beyond the lattice window \
             pi/dp = {window:.3}; its spatial periodization overlaps"
        )
    })
}

fn field_with<M>(f: &TestFunction, fock: &TruncatedFock, multiplier: M) -> Result<FieldOperator>
where
    M: Fn(&[f64]) -> Complex64,
{
    let lat = &fock.lattice;
    if f.dim() != lat.dim {
        return Err(Error::DimensionMismatch { expected: lat.dim, actual: f.dim() });
    }
    let mut op = FieldOperator::zero(lat.len());
    for k in 0..lat.len() {
        let (up, down) = lat.shell_points(k);
        let c = lat.field_coefficient(k);
        op.annihilation[k] = multiplier(&up) * f.fourier(&up)? * c;
        op.creation[k] = multiplier(&down) * f.fourier(&down)? * c;
    }
    op.warnings.extend(aliasing_warning(f, lat));
    Ok(op)
}

/// φ₀(f) = Σ_k c_k [f̃(ω_k, p_k) a_k + f̃(−ω_k, −p_k) a_k†].
pub fn build_field(f: &TestFunction, fock: &TruncatedFock) -> Result<FieldOperator> {
    field_with(f, fock, |_| Complex64::new(1.0, 0.0))
}

/// φ₀(Bf): f̃ replaced by B·f̃ at every on-shell node.
pub fn build_multiplier_field(
    b: &MultiplierField,
    f: &TestFunction,
    fock: &TruncatedFock,
) -> Result<FieldOperator> {
    let lat = &fock.lattice;
    if b.dim() != lat.dim {
        return Err(Error::DimensionMismatch { expected: lat.dim, actual: b.dim() });
    }
    let points: Vec<Vec<f64>> = (0..lat.len())
        .flat_map(|k| {
            let (up, down) = lat.shell_points(k);
            [up, down]
        })
        .collect();
    let even = evenness_on_points(b, points.iter().map(|p| p.as_slice()));
    if even.skipped || even.max_deviation > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "multiplier is not even on the lattice (max deviation {}); the commutator \
             would not depend on x - y alone",
            even.max_deviation
        )));
    }
    field_with(f, fock, |p| b.eval(p))
}

/// Conjugate transpose: a_k coefficients become conj(creation_k) and vice versa.
pub fn adjoint_field(x: &FieldOperator) -> FieldOperator {
    FieldOperator {
        annihilation: x.creation.iter().map(|c| c.conj()).collect(),
        creation: x.annihilation.iter().map(|c| c.conj()).collect(),
        warnings: x.warnings.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub lambda: Complex64,
    /// max |PCP − λP| / (|λ| + floor).
    pub deviation: f64,
    /// Σ_k (|α^X β^Y| + |β^X α^Y|).
    pub floor: f64,
    pub safe_dimension: usize,
}

fn inner(u: &State, v: &State) -> Complex64 {
    let (mut i, mut j) = (0, 0);
    let mut terms = Vec::new();
    while i < u.len() && j < v.len() {
        match u[i].0.cmp(&v[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                terms.push(u[i].1.conj() * v[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    crate::quadrature::pairwise_sum(&terms)
}

/// [X, Y] on the safe subspace, where it must equal λ·1.
pub fn commutator_cnumber(
    x: &FieldOperator,
    y: &FieldOperator,
    fock: &TruncatedFock,
) -> Result<CommutatorReport> {
    x.check_modes(fock)?;
    y.check_modes(fock)?;
    let n = fock.n_tot;
    let safe = fock.safe_basis();
    let one = Complex64::new(1.0, 0.0);
    let (xd, yd) = (adjoint_field(x), adjoint_field(y));
    let single = |op: &FieldOperator, s: &[u32]| {
        let mut out = Vec::new();
        op.apply_basis(s, one, n, &mut out);
        normalize(out)
    };
    let xs: Vec<State> = safe.iter().map(|s| single(x, s)).collect();
    let ys: Vec<State> = safe.iter().map(|s| single(y, s)).collect();
    let xds: Vec<State> = safe.iter().map(|s| single(&xd, s)).collect();
    let yds: Vec<State> = safe.iter().map(|s| single(&yd, s)).collect();
    // ⟨s′|XY − YX|s⟩ = ⟨X†s′|Ys⟩ − ⟨Y†s′|Xs⟩
    let entry = |i: usize, j: usize| inner(&xds[i], &ys[j]) - inner(&yds[i], &xs[j]);
    let diag: Vec<Complex64> = (0..safe.len()).map(|j| entry(j, j)).collect();
    let lambda = crate::quadrature::pairwise_sum(&diag) / safe.len() as f64;
    let floor: f64 = (0..x.modes())
        .map(|k| {
            (x.annihilation[k] * y.creation[k]).norm() + (x.creation[k] * y.annihilation[k]).norm()
        })
        .sum();
    let mut worst = 0.0f64;
    for i in 0..safe.len() {
        for j in 0..safe.len() {
            let target = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((entry(i, j) - target).norm());
        }
    }
    let denom = lambda.norm() + floor;
    Ok(CommutatorReport {
        lambda,
        deviation: if denom > 0.0 { worst / denom } else { worst },
        floor,
        safe_dimension: safe.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationProfile {
    pub n_tot: usize,
    pub dimension: usize,
    /// Basis states whose column of [X, Y] differs from λ·e_j beyond rounding.
    pub deviating_columns: usize,
    pub deviating_fraction: f64,
}

/// Applies [X, Y] to every basis state of the full truncated space.
pub fn truncation_profile(
    x: &FieldOperator,
    y: &FieldOperator,
    fock: &TruncatedFock,
) -> Result<TruncationProfile> {
    let basis = fock.basis()?;
    let rep = commutator_cnumber(x, y, fock)?;
    let tol = 1e-12 * (rep.lambda.norm() + rep.floor);
    let n = fock.n_tot;
    let mut deviating = 0;
    for s in &basis {
        let e: State = vec![(s.clone(), Complex64::new(1.0, 0.0))];
        let xy = x.apply(&y.apply(&e, n), n);
        let yx = y.apply(&x.apply(&e, n), n);
        let mut keys: Vec<&Vec<u32>> = xy.iter().chain(&yx).map(|e| &e.0).collect();
        keys.push(s);
        keys.sort();
        keys.dedup();
        let bad = keys.into_iter().any(|key| {
            let c = lookup(&xy, key) - lookup(&yx, key);
            let target = if key == s { rep.lambda } else { Complex64::new(0.0, 0.0) };
            (c - target).norm() > tol
        });
        deviating += bad as usize;
    }
    Ok(TruncationProfile {
        n_tot: n,
        dimension: basis.len(),
        deviating_columns: deviating,
        deviating_fraction: deviating as f64 / basis.len() as f64,
    })
}

/// Discrete Δ with an arbitrary kernel, computed directly from the on-shell
/// values without any ladder algebra:
/// Σ_k c_k² [K(ω,p) f̃(ω,p) g̃(−ω,−p) − K(−ω,−p) f̃(−ω,−p) g̃(ω,p)].
pub fn mode_sum<K>(
    kernel: K,
    f: &TestFunction,
    g: &TestFunction,
    lattice: &ModeLattice,
) -> Result<Complex64>
where
    K: Fn(&[f64]) -> Complex64,
{
    let mut terms = Vec::with_capacity(lattice.len());
    for k in 0..lattice.len() {
        let (up, down) = lattice.shell_points(k);
        let c2 = lattice.field_coefficient(k).powi(2);
        let t = kernel(&up) * f.fourier(&up)? * g.fourier(&down)?
            - kernel(&down) * f.fourier(&down)? * g.fourier(&up)?;
        terms.push(t * c2);
    }
    Ok(crate::quadrature::pairwise_sum(&terms))
}

/// A₀ · ‖f̃‖·‖g̃‖ over the lattice shell nodes.
pub fn lattice_scale(f: &TestFunction, g: &TestFunction, lattice: &ModeLattice) -> Result<f64> {
    let one = Polynomial::one(lattice.dim);
    let s = shell_sum(&one, f, g, lattice.mass, &MomentumRule::Nodes(lattice.nodes()))?;
    Ok(standard_constant(lattice.dim) * s.scale)
}

/// Injectivity of f ↦ φ₀(Bf) on lattice-band-limited functions: every
/// on-shell multiplier value must be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Faithfulness {
    pub injective: bool,
    pub min_abs_multiplier: f64,
}

pub fn faithfulness(b: &MultiplierField, lattice: &ModeLattice) -> Faithfulness {
    let min = (0..lattice.len())
        .flat_map(|k| {
            let (up, down) = lattice.shell_points(k);
            [b.eval(&up).norm(), b.eval(&down).norm()]
        })
        .fold(f64::INFINITY, f64::min);
    Faithfulness {
        injective: min > 0.0,
        min_abs_multiplier: min,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum ProbeVerdict {
    /// Both commutators within tolerance.
    RelativelyLocal,
    /// Self-commutator local, adjoint commutator above tolerance.
    NonlocalAdjoint,
    /// The self-commutator itself exceeds tolerance.
    SelfNonlocal,
    /// Supports not spacelike separated; no claim.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub spacelike: bool,
    pub comm_ff: CommutatorReport,
    pub comm_fg_adj: CommutatorReport,
    pub scale: f64,
    pub tolerance: f64,
    /// |λ| / (tolerance · scale).
    pub ratio_ff: f64,
    /// |λ′| / (tolerance · scale).
    pub ratio_adj: f64,
    pub verdict: ProbeVerdict,
}

/// Compares [φ_B(f), φ_B(g)] (kernel B² = A) with [φ_B(f), φ_B(g)†]
/// (kernel |B|² = |A|) for compactly supported f, g.
pub fn relative_locality_probe(
    b: &MultiplierField,
    f: &TestFunction,
    g: &TestFunction,
    fock: &TruncatedFock,
    tolerance: f64,
) -> Result<ProbeReport> {
    let (sf, sg) = match (f.support(), g.support()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidInput(
                "relative locality probe needs compactly supported test functions".into(),
            ))
        }
    };
    let spacelike = regions_spacelike_separated(sf, sg)?;
    let xf = build_multiplier_field(b, f, fock)?;
    let xg = build_multiplier_field(b, g, fock)?;
    let comm_ff = commutator_cnumber(&xf, &xg, fock)?;
    let comm_fg_adj = commutator_cnumber(&xf, &adjoint_field(&xg), fock)?;
    let scale = lattice_scale(f, g, &fock.lattice)?;
    let unit = tolerance * scale;
    let ratio_ff = comm_ff.lambda.norm() / unit;
    let ratio_adj = comm_fg_adj.lambda.norm() / unit;
    let verdict = if !spacelike {
        ProbeVerdict::NotApplicable
    } else if ratio_ff > 1.0 {
        ProbeVerdict::SelfNonlocal
    } else if ratio_adj > 1.0 {
        ProbeVerdict::NonlocalAdjoint
    } else {
        ProbeVerdict::RelativelyLocal
    };
    Ok(ProbeReport {
        spacelike,
        comm_ff,
        comm_fg_adj,
        scale,
        tolerance,
        ratio_ff,
        ratio_adj,
        verdict,
    })
}

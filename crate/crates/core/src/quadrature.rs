//! Momentum-space quadrature: Gauss–Legendre rules, node sets and a
//! deterministic parallel reduction.

use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1].
///
/// The rule is made exactly symmetric (x₍ₙ₋₁₋ᵢ₎ = −xᵢ bit for bit) so that
/// sums over p and −p pair up without rounding asymmetry.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Pairwise (tree) summation; fixed association order for a given length.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    match values.len() {
        0 => T::default(),
        1 => values[0],
        n if n <= 8 => values.iter().fold(T::default(), |a, &b| a + b),
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Explicit list of spatial momentum nodes with weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl NodeSet {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() {
            return Err(Error::InvalidInput(format!(
                "node set shape mismatch: {} coordinates for {} weights in dimension {dim}",
                points.len(),
                weights.len()
            )));
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    #[default]
    TensorGaussLegendre,
}

/// A quadrature rule over spatial momenta ℝ^{d−1}.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentumRule {
    /// Tensor Gauss–Legendre on the cube [−cutoff, cutoff]^dim.
    Tensor {
        dim: usize,
        nodes: Vec<f64>,
        weights: Vec<f64>,
    },
    Nodes(NodeSet),
}

const CHUNK: usize = 2048;

impl MomentumRule {
    pub fn tensor(dim: usize, nodes_per_axis: usize, cutoff: f64) -> Self {
        let (x, w) = gauss_legendre(nodes_per_axis);
        Self::Tensor {
            dim,
            nodes: x.iter().map(|v| v * cutoff).collect(),
            weights: w.iter().map(|v| v * cutoff).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Tensor { dim, .. } => *dim,
            Self::Nodes(n) => n.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Tensor { dim, nodes, .. } => nodes.len().pow(*dim as u32),
            Self::Nodes(n) => n.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn fill(&self, index: usize, buf: &mut [f64]) -> f64 {
        match self {
            Self::Tensor { nodes, weights, .. } => {
                let n = nodes.len();
                let mut rem = index;
                let mut w = 1.0;
                for slot in buf.iter_mut() {
                    let k = rem % n;
                    rem /= n;
                    *slot = nodes[k];
                    w *= weights[k];
                }
                w
            }
            Self::Nodes(set) => {
                buf.copy_from_slice(set.point(index));
                set.weight(index)
            }
        }
    }

    /// Σ w_k f(p_k), evaluated in parallel with a summation order that does
    /// not depend on the number of worker threads.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Send,
        F: Fn(&[f64], f64) -> T + Sync,
    {
        let total = self.len();
        let dim = self.dim();
        let chunks = total.div_ceil(CHUNK);
        let partial: Vec<T> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![0.0; dim];
                let end = ((c + 1) * CHUNK).min(total);
                let vals: Vec<T> = (c * CHUNK..end)
                    .map(|i| {
                        let w = self.fill(i, &mut buf);
                        f(&buf, w)
                    })
                    .collect();
                pairwise_sum(&vals)
            })
            .collect();
        pairwise_sum(&partial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 33, 64] {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k} q={q}");
            }
        }
    }

    #[test]
    fn nodes_are_mirror_symmetric() {
        for n in [8, 9, 200] {
            let (x, w) = gauss_legendre(n);
            for i in 0..n {
                assert_eq!(x[i], -x[n - 1 - i]);
                assert_eq!(w[i], w[n - 1 - i]);
            }
            if n % 2 == 0 {
                assert!(x.iter().all(|&v| v != 0.0));
            }
        }
    }

    #[test]
    fn tensor_rule_volume_and_gaussian() {
        let rule = MomentumRule::tensor(3, 64, 8.0);
        let vol: f64 = rule.integrate(|_, w| w);
        assert!((vol - 16f64.powi(3)).abs() < 1e-9);
        let g: f64 = rule.integrate(|p, w| w * (-p.iter().map(|x| x * x).sum::<f64>()).exp());
        assert!((g - std::f64::consts::PI.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn reduction_is_independent_of_thread_count() {
        let rule = MomentumRule::tensor(3, 37, 3.0);
        let f = |p: &[f64], w: f64| w * (p[0] * 1.3).sin() * (p[1] - p[2]).cos();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| rule.integrate(f));
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| rule.integrate(f));
        assert_eq!(serial.to_bits(), parallel.to_bits());
    }
}

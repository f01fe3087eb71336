//! Finite-difference weights (Fornberg's recursion) and the fixed-accuracy
//! stencils used to build nodal Taylor data.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Formal accuracy of every derivative stencil.
pub const ACCURACY: usize = 4;
/// Highest derivative order with a stencil.
pub const MAX_ORDER: usize = 4;

/// Weights `w[d][j]` such that `Σ_j w[d][j] f(x[j]) ≈ f^(d)(z)` for
/// `d = 0..=max_d`.
pub fn fornberg(z: f64, x: &[f64], max_d: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_d + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_d);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A stencil on a uniform 1D index range: `Σ_j weights[j] f[start + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    /// Derivative of order `d` at node `i` of a grid with nodes `0..=n` and
    /// spacing `dx`. Centered where it fits, otherwise the nearest window
    /// of `d + ACCURACY` points.
    pub fn derivative(d: usize, i: usize, n: usize, dx: f64) -> Result<Stencil> {
        if d > MAX_ORDER {
            return Err(Error::UnsupportedOrder(d));
        }
        if d == 0 {
            return Ok(Stencil {
                start: i,
                weights: vec![1.0],
            });
        }
        let half = if d <= 2 { 2 } else { 3 };
        let (start, len) = if i >= half && i + half <= n {
            (i - half, 2 * half + 1)
        } else {
            let len = d + ACCURACY;
            if len > n + 1 {
                return Err(Error::StencilDoesNotFit {
                    order: d,
                    needed: len,
                    available: n + 1,
                });
            }
            let start = if i < half { 0 } else { n + 1 - len };
            (start, len)
        };
        let nodes: Vec<f64> = (start..start + len).map(|j| j as f64 - i as f64).collect();
        let scale = dx.powi(d as i32);
        let weights = fornberg(0.0, &nodes, d)
            .swap_remove(d)
            .into_iter()
            .map(|w| w / scale)
            .collect();
        Ok(Stencil { start, weights })
    }

    pub fn apply(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * f(self.start + j))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

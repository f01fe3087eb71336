//! Scaled Taylor polynomials in one variable.
//!
//! A piece stores coefficients `c_l` of `Σ c_l s^l` with `s = (x - center)/h`.
//! The slice-level helpers at the bottom work on raw coefficient arrays and
//! are shared with the tensor-product code.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPoly1D {
    pub center: f64,
    pub h: f64,
    pub coeffs: Vec<f64>,
}

impl TaylorPoly1D {
    pub fn new(center: f64, h: f64, coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        TaylorPoly1D { center, h, coeffs }
    }

    pub fn constant(center: f64, h: f64, c: f64) -> Self {
        Self::new(center, h, vec![c])
    }

    /// Scaled Taylor data `h^l/l! f^(l)(center)` from the derivatives
    /// `derivs[l] = f^(l)(center)`.
    pub fn from_derivatives(center: f64, h: f64, derivs: &[f64]) -> Self {
        let mut scale = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(l, d)| {
                if l > 0 {
                    scale *= h / l as f64;
                }
                d * scale
            })
            .collect();
        Self::new(center, h, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, (x - self.center) / self.h)
    }

    pub fn differentiate(&self, n: usize) -> TaylorPoly1D {
        TaylorPoly1D::new(self.center, self.h, derivative(&self.coeffs, n, self.h))
    }

    /// Antiderivative vanishing at the center.
    pub fn antiderivative(&self) -> TaylorPoly1D {
        TaylorPoly1D::new(self.center, self.h, antiderivative(&self.coeffs, self.h))
    }

    /// Integral over `[center - h/2, center + h/2]`.
    pub fn cell_integral(&self) -> f64 {
        cell_integral(&self.coeffs, self.h)
    }
}

/// Unique degree `2m+1` polynomial matching value and first `m`
/// derivatives of `left` at its center and of `right` at its center.
pub fn hermite_fit_1d(left: &TaylorPoly1D, right: &TaylorPoly1D) -> Result<TaylorPoly1D> {
    if left.h != right.h || !(left.h > 0.0) {
        return Err(Error::MismatchedSpacing);
    }
    let gap = right.center - left.center;
    if (gap - left.h).abs() > 1e-12 * left.h.abs().max(left.center.abs()) {
        return Err(Error::MismatchedSpacing);
    }
    if left.coeffs.len() != right.coeffs.len() {
        return Err(Error::MismatchedDegree);
    }
    let m1 = left.coeffs.len();
    let mut out = vec![0.0; 2 * m1];
    hermite_fit(&left.coeffs, &right.coeffs, &mut out);
    Ok(TaylorPoly1D::new(
        0.5 * (left.center + right.center),
        left.h,
        out,
    ))
}

/// Dual-cell pieces sharing one spacing, piece `j` centered at
/// `x0 + (j + 1/2) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTaylor1D {
    pub x0: f64,
    pub h: f64,
    pub pieces: Vec<TaylorPoly1D>,
}

impl PiecewiseTaylor1D {
    pub fn new(x0: f64, h: f64, pieces: Vec<TaylorPoly1D>) -> Result<Self> {
        if !(h > 0.0) || pieces.is_empty() {
            return Err(Error::DegenerateGrid(
                "piecewise polynomial needs h > 0 and a piece",
            ));
        }
        for (j, p) in pieces.iter().enumerate() {
            let c = x0 + (j as f64 + 0.5) * h;
            if p.h != h || (p.center - c).abs() > 1e-12 * h.max(c.abs()) {
                return Err(Error::MismatchedSpacing);
            }
        }
        Ok(PiecewiseTaylor1D { x0, h, pieces })
    }

    /// Hermite fit of primal Taylor data `nodes[i]` at `x0 + i h`.
    pub fn from_nodes(x0: f64, h: f64, nodes: &[Vec<f64>]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::DegenerateGrid("need at least two nodes"));
        }
        let mut pieces = Vec::with_capacity(nodes.len() - 1);
        for (j, pair) in nodes.windows(2).enumerate() {
            if pair[0].len() != pair[1].len() {
                return Err(Error::MismatchedDegree);
            }
            let mut out = vec![0.0; 2 * pair[0].len()];
            hermite_fit(&pair[0], &pair[1], &mut out);
            pieces.push(TaylorPoly1D::new(x0 + (j as f64 + 0.5) * h, h, out));
        }
        Ok(PiecewiseTaylor1D { x0, h, pieces })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.pieces.len() as f64 * self.h
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.h
    }

    /// Piece index and scaled offset for `x`, or `OutOfDomain`.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let slack = 1e-10 * self.h;
        if !(x >= self.x0 - slack && x <= self.x_max() + slack) {
            return Err(Error::OutOfDomain { r: x, z: f64::NAN });
        }
        Ok(locate_cell(x, self.x0, self.h, self.pieces.len()))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (j, s) = self.locate(x)?;
        Ok(horner(&self.pieces[j].coeffs, s))
    }

    /// `∫_{x_j}^{x} f` where `x_j` is the center of piece `j`.
    pub fn integral_from_dual_point(&self, j: usize, x: f64) -> Result<f64> {
        if j >= self.pieces.len() {
            return Err(Error::OutOfDomain {
                r: self.center(j),
                z: f64::NAN,
            });
        }
        let (k, s) = self.locate(x)?;
        let anti: Vec<Vec<f64>> = self
            .pieces
            .iter()
            .map(|p| antiderivative(&p.coeffs, self.h))
            .collect();
        let f = |i: usize, s: f64| horner(&anti[i], s);
        let full = |i: usize| f(i, 0.5) - f(i, -0.5);
        Ok(if k == j {
            f(j, s)
        } else if k > j {
            let mid: f64 = (j + 1..k).map(full).sum();
            f(j, 0.5) + mid + f(k, s) - f(k, -0.5)
        } else {
            let mid: f64 = (k + 1..j).map(full).sum();
            -(f(k, 0.5) - f(k, s)) - mid + f(j, -0.5)
        })
    }
}

/// Dual cell of a regular 1D grid holding `x` (interior gridlines go to
/// the lower cell) and the scaled offset from its center.
pub fn locate_cell(x: f64, x0: f64, h: f64, n: usize) -> (usize, f64) {
    let t = (x - x0) / h;
    let j = if t <= 0.0 {
        0
    } else {
        (t.ceil() as usize).saturating_sub(1).min(n - 1)
    };
    (j, t - (j as f64 + 0.5))
}

/// `Σ c_l s^l`.
pub fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
}

/// Coefficients of the `n`-th `x`-derivative of `Σ c_l s^l`, `s = (x-x_c)/h`.
pub fn derivative(c: &[f64], n: usize, h: f64) -> Vec<f64> {
    if n == 0 {
        return c.to_vec();
    }
    if n >= c.len() {
        return vec![0.0];
    }
    let hn = h.powi(n as i32);
    (0..c.len() - n)
        .map(|l| {
            let fall: f64 = (l + 1..=l + n).map(|v| v as f64).product();
            fall / hn * c[l + n]
        })
        .collect()
}

/// Coefficients of the antiderivative vanishing at `s = 0`.
pub fn antiderivative(c: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (l, v) in c.iter().enumerate() {
        out[l + 1] = h / (l + 1) as f64 * v;
    }
    out
}

/// Integral over the unit scaled cell `s ∈ [-1/2, 1/2]` times `h`.
pub fn cell_integral(c: &[f64], h: f64) -> f64 {
    let mut quarter = 1.0;
    let mut sum = 0.0;
    for (k, v) in c.iter().step_by(2).enumerate() {
        sum += h / (2 * k + 1) as f64 * v * quarter;
        quarter *= 0.25;
    }
    sum
}

/// Two-point Hermite fit in the scaled variable of the dual cell.
///
/// `a` and `b` are scaled Taylor data (same length `m+1`) at `s = -1/2` and
/// `s = +1/2`; `out` (length `2m+2`) receives the monomial coefficients in `s`.
pub fn hermite_fit(a: &[f64], b: &[f64], out: &mut [f64]) {
    let m1 = a.len();
    let n = 2 * m1;
    debug_assert_eq!(b.len(), m1);
    debug_assert_eq!(out.len(), n);
    // Divided-difference table, built column by column. `col[i]` holds
    // f[z_i .. z_{i+k}] after pass k.
    let node = |i: usize| if i < m1 { -0.5 } else { 0.5 };
    let mut col = [0.0f64; 32];
    let mut newton = [0.0f64; 32];
    assert!(n <= 32, "hermite_fit supports m <= 15");
    for i in 0..n {
        col[i] = if i < m1 { a[0] } else { b[0] };
    }
    newton[0] = col[0];
    for k in 1..n {
        for i in 0..n - k {
            col[i] = if i + k < m1 {
                a[k]
            } else if i >= m1 {
                b[k]
            } else {
                col[i + 1] - col[i]
            };
        }
        newton[k] = col[0];
    }
    // Nested multiplication into monomials: P = c_0 + (s - z_0)(c_1 + ...).
    for v in out.iter_mut() {
        *v = 0.0;
    }
    out[0] = newton[n - 1];
    let mut deg = 0;
    for k in (0..n - 1).rev() {
        let z = node(k);
        deg += 1;
        for l in (1..=deg).rev() {
            out[l] = out[l - 1] - z * out[l];
        }
        out[0] = newton[k] - z * out[0];
    }
}
